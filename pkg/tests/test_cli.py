"""Command-line client: artifacts on disk, overrides, exit codes."""

import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from maats.cli import main


@pytest.fixture()
def runner():
    return CliRunner()


def write_config(tmp_path: Path, payload: dict) -> str:
    path = tmp_path / "config.json"
    path.write_text(json.dumps(payload))
    return str(path)


class TestSimulateCommand:
    def test_writes_artifacts(self, runner, tmp_path):
        cfg = write_config(tmp_path, {"trajectory": {"kind": "hover"}, "duration": 0.3})
        out = tmp_path / "run"
        result = runner.invoke(
            main, ["simulate", "--config", cfg, "--out", str(out)]
        )
        assert result.exit_code == 0, result.output
        csv_text = (out / "timeseries.csv").read_text()
        assert csv_text.startswith("t,")
        metrics = json.loads((out / "metrics.json").read_text())
        assert metrics["rms_error_m"] < 1e-3
        assert "rms_error" in result.output

    def test_overrides_apply(self, runner, tmp_path):
        cfg = write_config(tmp_path, {"trajectory": {"kind": "hover"}})
        out = tmp_path / "run"
        result = runner.invoke(
            main,
            [
                "simulate", "--config", cfg, "--out", str(out),
                "--duration", "0.2", "--dt", "0.002",
                "--allocator", "baseline", "--mu", "0.5",
            ],
        )
        assert result.exit_code == 0, result.output
        rows = (out / "timeseries.csv").read_text().strip().split("\n")
        assert len(rows) == 1 + 100  # 0.2 s at 2 ms

    def test_env_var_supplies_config(self, runner, tmp_path, monkeypatch):
        cfg = write_config(tmp_path, {"trajectory": {"kind": "hover"}, "duration": 0.1})
        monkeypatch.setenv("MAATS_CONFIG", cfg)
        out = tmp_path / "run"
        result = runner.invoke(main, ["simulate", "--out", str(out)])
        assert result.exit_code == 0, result.output
        assert (out / "metrics.json").exists()

    def test_invalid_config_nonzero_exit(self, runner, tmp_path):
        cfg = write_config(tmp_path, {"alloc": {"mu": -3}})
        result = runner.invoke(main, ["simulate", "--config", cfg])
        assert result.exit_code != 0
        assert "mu" in result.output

    def test_missing_config_file(self, runner):
        result = runner.invoke(main, ["simulate", "--config", "/no/such/file.json"])
        assert result.exit_code != 0
        assert "cannot read config" in result.output

    def test_plot_writes_charts(self, runner, tmp_path):
        pytest.importorskip("matplotlib")
        cfg = write_config(tmp_path, {"trajectory": {"kind": "hover"}, "duration": 0.1})
        out = tmp_path / "run"
        result = runner.invoke(
            main, ["simulate", "--config", cfg, "--out", str(out), "--plot"]
        )
        assert result.exit_code == 0, result.output
        for name in ("tracking.png", "tensions.png", "cable_angles.png"):
            assert (out / name).exists()


class TestSweepCommand:
    def test_writes_sweep_json(self, runner, tmp_path):
        cfg = write_config(tmp_path, {"trajectory": {"kind": "hover"}, "duration": 0.2})
        out = tmp_path / "sweepout"
        result = runner.invoke(
            main, ["sweep", "--config", cfg, "--mu", "0.15,0.75", "--out", str(out)]
        )
        assert result.exit_code == 0, result.output
        rows = json.loads((out / "sweep.json").read_text())
        assert [row["mu"] for row in rows] == [0.15, 0.75]

    def test_bad_mu_list(self, runner, tmp_path):
        cfg = write_config(tmp_path, {})
        result = runner.invoke(main, ["sweep", "--config", cfg, "--mu", "a,b"])
        assert result.exit_code != 0


class TestBenchCommand:
    def test_prints_summary(self, runner, tmp_path):
        cfg = write_config(tmp_path, {"trajectory": {"kind": "hover"}, "duration": 1.0})
        result = runner.invoke(main, ["bench", "--config", cfg, "--samples", "1000"])
        assert result.exit_code == 0, result.output
        assert "mean=" in result.output and "p99=" in result.output

    def test_sample_floor_propagates(self, runner, tmp_path):
        cfg = write_config(tmp_path, {})
        result = runner.invoke(main, ["bench", "--config", cfg, "--samples", "5"])
        assert result.exit_code != 0
