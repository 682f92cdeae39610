"""Static chart rendering from run artifacts (convenience, never load-bearing).

Charts are produced from the CSV/JSON artifacts rather than live objects so
the CLI can render results fetched from a remote service.  matplotlib is an
optional dependency; install the ``plot`` extra to use these helpers.
"""

from __future__ import annotations

import json
from pathlib import Path


def _require_matplotlib():
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError as exc:  # pragma: no cover - depends on extras
        raise RuntimeError(
            "plotting requires matplotlib; install the 'plot' extra"
        ) from exc
    return plt


def parse_timeseries_csv(text: str) -> dict[str, list]:
    """Columns keyed by header name; numeric where possible."""
    lines = [ln for ln in text.strip().split("\n") if ln]
    header = lines[0].split(",")
    columns: dict[str, list] = {name: [] for name in header}
    for line in lines[1:]:
        for name, cell in zip(header, line.split(",")):
            try:
                columns[name].append(float(cell))
            except ValueError:
                columns[name].append(cell)
    return columns


def render_run_plots(csv_text: str, out_dir: str | Path) -> list[Path]:
    """Tracking, error, tension, and angle charts for one run."""
    plt = _require_matplotlib()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cols = parse_timeseries_csv(csv_text)
    t = cols["t"]
    n = sum(1 for name in cols if name.startswith("T_actual_"))
    pair_names = [name for name in cols if name.startswith("theta_")]
    written: list[Path] = []

    def save(fig, name: str) -> None:
        path = out / name
        fig.savefig(path, dpi=120, bbox_inches="tight")
        written.append(path)

    fig, axes = plt.subplots(3, 1, figsize=(8, 7), sharex=True)
    for ax, comp in zip(axes, "xyz"):
        ax.plot(t, cols[f"x_ref_{comp}"], "k--", label="reference")
        ax.plot(t, cols[f"x_load_{comp}"], label="load")
        ax.set_ylabel(f"{comp} [m]")
        ax.legend(loc="upper right", fontsize=8)
    axes[-1].set_xlabel("t [s]")
    fig.suptitle("Load trajectory tracking")
    save(fig, "tracking.png")
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(8, 3.2))
    for comp in "xyz":
        ax.plot(t, [1e2 * v for v in cols[f"e_load_{comp}"]], label=comp)
    ax.set_xlabel("t [s]")
    ax.set_ylabel("error [cm]")
    ax.legend()
    fig.suptitle("Load position error")
    save(fig, "position_error.png")
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(8, 3.2))
    for i in range(1, n + 1):
        ax.plot(t, cols[f"T_actual_{i}"], label=f"cable {i}")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("tension [N]")
    ax.legend(ncol=n, fontsize=8)
    fig.suptitle("Cable tensions")
    save(fig, "tensions.png")
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(8, 3.2))
    for i in range(1, n + 1):
        ax.plot(t, cols[f"T_desired_{i}"], "--", alpha=0.7)
        ax.plot(t, cols[f"T_actual_{i}"], label=f"cable {i}")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("tension [N]")
    ax.legend(ncol=n, fontsize=8)
    fig.suptitle("Desired (dashed) vs actual tensions")
    save(fig, "tension_tracking.png")
    plt.close(fig)

    if pair_names:
        fig, ax = plt.subplots(figsize=(8, 3.2))
        for name in pair_names:
            ax.plot(t, cols[name], label=name.replace("theta_", "").replace("_deg", ""))
        ax.axhline(30.0, color="r", linestyle=":", label="30 deg threshold")
        ax.set_xlabel("t [s]")
        ax.set_ylabel("angle [deg]")
        ax.legend(ncol=4, fontsize=8)
        fig.suptitle("Pairwise cable angles")
        save(fig, "cable_angles.png")
        plt.close(fig)

    return written


def render_sweep_plot(sweep_json: str, out_dir: str | Path) -> Path:
    """Minimum angle and integrated tension cost against the penalty weight."""
    plt = _require_matplotlib()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = json.loads(sweep_json)
    mus = [row["mu"] for row in rows]
    angles = [row["metrics"]["min_pairwise_angle_deg"] for row in rows]
    costs = [row["metrics"]["tension_cost_ns"] for row in rows]

    fig, ax1 = plt.subplots(figsize=(6, 3.5))
    ax1.plot(mus, angles, "o-", color="tab:blue", label="min angle")
    ax1.set_xlabel("alignment weight")
    ax1.set_ylabel("min pairwise angle [deg]", color="tab:blue")
    ax2 = ax1.twinx()
    ax2.plot(mus, costs, "s--", color="tab:red", label="tension cost")
    ax2.set_ylabel("integrated tension cost [N s]", color="tab:red")
    fig.suptitle("Alignment-weight sensitivity")
    path = out / "mu_sensitivity.png"
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path
