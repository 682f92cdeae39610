"""Command-line client for the simulation service.

The CLI is a thin HTTP client: it reads a config document, applies command
line overrides, posts the request to the service, and writes the returned
artifacts to disk.  By default it talks to an in-process instance of the app
(no server needed); pass ``--server URL`` to use a running instance instead.
The MAATS_CONFIG environment variable supplies the config path when
``--config`` is omitted.
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click
import httpx

from .scenario import ConfigError, load_config

CONFIG_ENV = "MAATS_CONFIG"


class _InProcessClient:
    """Synchronous facade over the ASGI app (ASGITransport is async-only)."""

    def __init__(self) -> None:
        from .service.app import app

        self._transport = httpx.ASGITransport(app=app)

    def post(self, path: str, json: dict) -> httpx.Response:
        import asyncio

        async def go() -> httpx.Response:
            async with httpx.AsyncClient(
                transport=self._transport, base_url="http://maats.internal", timeout=None
            ) as client:
                return await client.post(path, json=json)

        return asyncio.run(go())

    def __enter__(self) -> "_InProcessClient":
        return self

    def __exit__(self, *exc) -> None:
        pass


def _client(server: str | None) -> httpx.Client | _InProcessClient:
    if server:
        return httpx.Client(base_url=server, timeout=600.0)
    return _InProcessClient()


def _read_config_dict(config_path: str | None) -> dict:
    path = config_path or os.environ.get(CONFIG_ENV)
    if path is None:
        return {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise click.ClickException(f"cannot read config {path}: {exc}") from exc
    try:
        return json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise click.ClickException(f"config {path} is not valid JSON: {exc}") from exc


def _apply_overrides(raw: dict, mu, allocator, duration, dt) -> dict:
    if mu is not None:
        raw.setdefault("alloc", {})["mu"] = mu
    if allocator is not None:
        raw.setdefault("alloc", {})["kind"] = allocator
    if duration is not None:
        raw["duration"] = duration
    if dt is not None:
        raw["dt"] = dt
    return raw


def _validated(raw: dict):
    try:
        return load_config(json.dumps(raw))
    except ConfigError as exc:
        raise click.ClickException(str(exc)) from exc


def _post(client: httpx.Client, path: str, payload: dict) -> dict:
    try:
        response = client.post(path, json=payload)
    except httpx.HTTPError as exc:
        raise click.ClickException(f"request failed: {exc}") from exc
    if response.status_code != 200:
        try:
            detail = response.json().get("detail", response.text)
        except ValueError:
            detail = response.text
        raise click.ClickException(f"service error ({response.status_code}): {detail}")
    return response.json()


@click.group()
def main() -> None:
    """Cable-tension allocation and closed-loop transport simulation."""


@main.command()
@click.option("--config", "config_path", type=str, default=None, help="JSON config path")
@click.option("--mu", type=float, default=None, help="alignment weight override")
@click.option(
    "--allocator", type=click.Choice(["sqp", "baseline"]), default=None,
    help="allocator override",
)
@click.option("--duration", type=float, default=None, help="run length override, s")
@click.option("--dt", type=float, default=None, help="step size override, s")
@click.option("--out", "out_dir", type=str, default=None, help="output directory")
@click.option("--plot", is_flag=True, help="also render charts from the CSV")
@click.option("--server", type=str, default=None, help="remote service URL")
def simulate(config_path, mu, allocator, duration, dt, out_dir, plot, server) -> None:
    """Run one closed-loop mission; writes timeseries.csv and metrics.json."""
    raw = _apply_overrides(_read_config_dict(config_path), mu, allocator, duration, dt)
    cfg = _validated(raw)
    out = Path(out_dir or cfg.output.directory)
    with _client(server) as client:
        data = _post(client, "/simulate", {"config": raw, "include_timeseries": True})
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / cfg.output.timeseries
    csv_path.write_text(data["timeseries_csv"])
    metrics_path = out / cfg.output.metrics
    metrics_path.write_text(json.dumps(data["metrics"], indent=2) + "\n")
    if plot:
        from .plots import render_run_plots

        try:
            render_run_plots(data["timeseries_csv"], out)
        except RuntimeError as exc:
            raise click.ClickException(str(exc)) from exc
    m = data["metrics"]
    click.echo(
        f"rms_error={m['rms_error_m'] * 100:.3f} cm  "
        f"max_error={m['max_error_m'] * 100:.3f} cm  "
        f"min_angle={m['min_pairwise_angle_deg']:.1f} deg  "
        f"tension_cost={m['tension_cost_ns']:.1f} N s"
    )
    click.echo(f"wrote {csv_path} and {metrics_path}")


@main.command()
@click.option("--config", "config_path", type=str, default=None, help="JSON config path")
@click.option("--mu", "mu_list", type=str, required=True, help="comma-separated weights")
@click.option("--out", "out_dir", type=str, default=None, help="output directory")
@click.option("--plot", is_flag=True, help="also render the sensitivity chart")
@click.option("--server", type=str, default=None, help="remote service URL")
def sweep(config_path, mu_list, out_dir, plot, server) -> None:
    """Run the mission once per mu value; writes sweep.json."""
    try:
        mu_values = [float(v) for v in mu_list.split(",") if v.strip()]
    except ValueError as exc:
        raise click.ClickException(f"bad --mu list {mu_list!r}: {exc}") from exc
    if not mu_values:
        raise click.ClickException("--mu list is empty")
    raw = _read_config_dict(config_path)
    cfg = _validated(raw)
    out = Path(out_dir or cfg.output.directory)
    with _client(server) as client:
        data = _post(client, "/sweep", {"config": raw, "mu_values": mu_values})
    out.mkdir(parents=True, exist_ok=True)
    sweep_path = out / cfg.output.sweep
    payload = json.dumps(data["results"], indent=2) + "\n"
    sweep_path.write_text(payload)
    if plot:
        from .plots import render_sweep_plot

        try:
            render_sweep_plot(payload, out)
        except RuntimeError as exc:
            raise click.ClickException(str(exc)) from exc
    for row in data["results"]:
        m = row["metrics"]
        click.echo(
            f"mu={row['mu']:<5} min_angle={m['min_pairwise_angle_deg']:.1f} deg  "
            f"tension_cost={m['tension_cost_ns']:.1f} N s  "
            f"rms_error={m['rms_error_m'] * 100:.3f} cm"
        )
    click.echo(f"wrote {sweep_path}")


@main.command()
@click.option("--config", "config_path", type=str, default=None, help="JSON config path")
@click.option("--samples", type=int, default=1000, show_default=True)
@click.option("--server", type=str, default=None, help="remote service URL")
def bench(config_path, samples, server) -> None:
    """Benchmark warm-started solver latency over a recorded demand trace."""
    raw = _read_config_dict(config_path)
    _validated(raw)
    with _client(server) as client:
        data = _post(client, "/bench", {"config": raw, "samples": samples})
    click.echo(
        f"samples={data['samples']}  mean={data['mean_s'] * 1e3:.3f} ms  "
        f"p99={data['p99_s'] * 1e3:.3f} ms  max={data['max_s'] * 1e3:.3f} ms  "
        f"iterations={data['mean_iterations']:.2f}"
    )


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(host: str, port: int) -> None:
    """Run the HTTP service."""
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    sys.exit(main())
