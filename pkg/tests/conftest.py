"""Shared fixtures: the expensive closed-loop missions are run once per
session and reused by the harness tests and the acceptance suite."""

import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # for the oracles module

from maats.harness import MetricsReport, RunRecords, run_simulation
from maats.scenario import ScenarioConfig, load_config


@dataclass
class Mission:
    cfg: ScenarioConfig
    records: RunRecords
    metrics: MetricsReport
    wall_s: float


def run_mission(overrides: dict) -> Mission:
    cfg = load_config(json.dumps(overrides))
    t0 = time.perf_counter()
    records, metrics = run_simulation(cfg)
    return Mission(cfg, records, metrics, time.perf_counter() - t0)


@pytest.fixture(scope="session")
def spiral_sqp() -> Mission:
    """Default 20 s spiral mission, SQP allocator, mu = 0.15."""
    return run_mission({})


@pytest.fixture(scope="session")
def spiral_baseline() -> Mission:
    """Identical mission with the fixed-cone baseline allocator."""
    return run_mission({"alloc": {"kind": "baseline"}})


@pytest.fixture(scope="session")
def spiral_mu_sweep(spiral_sqp) -> list[tuple[float, MetricsReport]]:
    """Metrics for mu in {0.15, 0.75, 1.35}; reuses the default run for 0.15."""
    out = [(0.15, spiral_sqp.metrics)]
    for mu in (0.75, 1.35):
        out.append((mu, run_mission({"alloc": {"mu": mu}}).metrics))
    return out


@pytest.fixture(scope="session")
def hover_run() -> Mission:
    """5 s hover hold with zero initial error."""
    return run_mission({"trajectory": {"kind": "hover"}, "duration": 5.0})
