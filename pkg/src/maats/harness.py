"""Closed-loop runner: allocator -> position/attitude control -> plant at a
single 1 kHz rate, plus metrics, CSV/JSON artifacts, mu sweeps, and solver
latency benchmarks.

Determinism: identical configurations produce identical records (and
byte-identical CSV apart from the measured solve-time column); there is no
randomness anywhere in the loop and results never depend on wall-clock time.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .allocator import (
    AllocProblem,
    AllocSolution,
    baseline_allocate,
    fixed_cone_directions,
    initial_guess,
    sqp_solve,
)
from .control import (
    AttitudeSingularity,
    ControlCommand,
    ControllerState,
    DegenerateThrust,
    attitude_control,
    load_control,
    position_control,
)
from .dynamics import PlantInputs, PlantState, SingularMassMatrix, rk4_step
from .mathcore import QUAT_IDENTITY
from .scenario import ScenarioConfig


class EmptyRun(ValueError):
    """Metrics requested for a run with no records."""


class SimulationDiverged(RuntimeError):
    """Plant state became non-finite (controller blow-up)."""

    def __init__(self, tick: int, t: float):
        super().__init__(f"non-finite plant state at tick {tick} (t = {t:.3f} s)")
        self.tick = tick
        self.t = t


@dataclass
class RunRecords:
    """One row per control tick; pairwise angles are between measured cable
    directions, ordered (1,2), (1,3), ..., (n-1,n)."""

    n: int
    t: np.ndarray
    x_load: np.ndarray
    x_ref: np.ndarray
    e_load: np.ndarray
    T_actual: np.ndarray
    T_desired: np.ndarray
    pair_angles_deg: np.ndarray
    f_id: np.ndarray
    solver_iterations: np.ndarray
    solver_status: list[str]
    solve_time: np.ndarray
    slack: np.ndarray
    u_load: np.ndarray  # kept for benchmark replay; not a CSV column

    @property
    def pair_labels(self) -> list[str]:
        return [
            f"{i + 1}{j + 1}" for i in range(self.n) for j in range(i + 1, self.n)
        ]

    def __len__(self) -> int:
        return self.t.size


@dataclass
class MetricsReport:
    rms_error_m: float
    max_error_m: float
    min_pairwise_angle_deg: float | None
    tension_cost_ns: float
    tension_mean_n: list[float]
    tension_max_n: list[float]
    tension_spread_mean_n: float
    peak_total_tension_n: float
    peak_to_average_tension: float
    solver_time_mean_s: float
    solver_time_p99_s: float
    solver_time_max_s: float
    solver_iterations_mean: float
    slack_events: int
    desired_actual_tension_mae_n: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "rms_error_m": self.rms_error_m,
            "max_error_m": self.max_error_m,
            "min_pairwise_angle_deg": self.min_pairwise_angle_deg,
            "tension_cost_ns": self.tension_cost_ns,
            "tension_mean_n": self.tension_mean_n,
            "tension_max_n": self.tension_max_n,
            "tension_spread_mean_n": self.tension_spread_mean_n,
            "peak_total_tension_n": self.peak_total_tension_n,
            "peak_to_average_tension": self.peak_to_average_tension,
            "solver_time_mean_s": self.solver_time_mean_s,
            "solver_time_p99_s": self.solver_time_p99_s,
            "solver_time_max_s": self.solver_time_max_s,
            "solver_iterations_mean": self.solver_iterations_mean,
            "slack_events": self.slack_events,
            "desired_actual_tension_mae_n": self.desired_actual_tension_mae_n,
        }


def initial_plant_state(cfg: ScenarioConfig) -> PlantState:
    """Load on the reference with matching velocity, cables in the cold-start
    cone for the t = 0 demand, UAVs level, all angular rates zero.

    Using the allocator's own cold-start geometry (axis and azimuths) makes
    the first allocation agree with the plant's cables, so the run starts
    without a formation transient.
    """
    n = cfg.plant.n
    params = cfg.plant.to_params()
    ref0 = cfg.make_trajectory().at(0.0)
    demand = -params.m_load * (params.g * np.array([0.0, 0.0, 1.0]) + ref0.acc)
    alpha = initial_guess(demand, n, cfg.alloc.sqp.cone_half_angle_deg).alpha
    return PlantState(
        x_load=ref0.pos.copy(),
        v_load=ref0.vel.copy(),
        alpha=alpha,
        omega_cable=np.zeros((n, 3)),
        quat=np.tile(QUAT_IDENTITY, (n, 1)),
        omega_body=np.zeros((n, 3)),
    )


def _pair_index(n: int) -> tuple[np.ndarray, np.ndarray]:
    ii, jj = np.triu_indices(n, k=1)
    return ii, jj


def run_simulation(cfg: ScenarioConfig) -> tuple[RunRecords, MetricsReport]:
    """Run the closed loop for the configured duration and summarize it."""
    params = cfg.plant.to_params()
    n = params.n
    gains_load = cfg.gains.load.to_gains()
    gains_uav = cfg.gains.uav.to_gains()
    settings = cfg.alloc.sqp.to_settings()
    trajectory = cfg.make_trajectory()
    dt = cfg.dt
    ticks = int(round(cfg.duration / dt))

    s = initial_plant_state(cfg)
    cs = ControllerState.initial(n)
    warm: AllocSolution | None = None
    prev_cmds: list[ControlCommand] | None = None

    ii, jj = _pair_index(n)
    n_pairs = ii.size

    rec_t = np.empty(ticks)
    rec_xl = np.empty((ticks, 3))
    rec_xr = np.empty((ticks, 3))
    rec_el = np.empty((ticks, 3))
    rec_ta = np.empty((ticks, n))
    rec_td = np.empty((ticks, n))
    rec_ang = np.empty((ticks, n_pairs))
    rec_f = np.empty((ticks, n))
    rec_it = np.empty(ticks, dtype=int)
    rec_status: list[str] = []
    rec_time = np.empty(ticks)
    rec_slack = np.zeros((ticks, n), dtype=bool)
    rec_ul = np.empty((ticks, 3))

    use_sqp = cfg.alloc.kind == "sqp"
    baseline_dirs = fixed_cone_directions(n, cfg.alloc.baseline_cone_half_angle_deg)

    for k in range(ticks):
        t = k * dt
        ref = trajectory.at(t)
        u_load = load_control(
            gains_load,
            params.m_load,
            params.g,
            s,
            ref,
            cs,
            dt,
            integral_limit=cfg.gains.load.integral_limit,
        )

        clock = time.perf_counter()
        if use_sqp:
            alloc = sqp_solve(
                AllocProblem(u_load, n=n, mu=cfg.alloc.mu, prev=warm), settings
            )
            warm = alloc
        else:
            alloc = baseline_allocate(
                u_load,
                n,
                cfg.alloc.baseline_cone_half_angle_deg,
                directions=baseline_dirs,
                strict=False,
            )
        elapsed = time.perf_counter() - clock

        cmds: list[ControlCommand] = []
        taus = np.empty((n, 3))
        for i in range(n):
            try:
                cmd = position_control(
                    gains_uav,
                    params.m_uav[i],
                    params.g,
                    params.cable_length[i],
                    float(alloc.T[i]),
                    alloc.alpha[i],
                    s,
                    ref,
                    cs,
                    i,
                    dt,
                )
            except (DegenerateThrust, AttitudeSingularity):
                if prev_cmds is None:
                    cmd = ControlCommand(
                        f_id=params.m_uav[i] * params.g,
                        q_id=QUAT_IDENTITY.copy(),
                        omega_id=np.zeros(3),
                    )
                else:
                    cmd = prev_cmds[i]
            cmd.tau = attitude_control(gains_uav, s, cmd, i)
            taus[i] = cmd.tau
            cmds.append(cmd)
        prev_cmds = cmds

        inputs = PlantInputs(np.array([c.f_id for c in cmds]), taus)

        rec_t[k] = t
        rec_xl[k] = s.x_load
        rec_xr[k] = ref.pos
        rec_el[k] = s.x_load - ref.pos
        rec_td[k] = alloc.T
        gram = np.clip(s.alpha @ s.alpha.T, -1.0, 1.0)
        rec_ang[k] = np.degrees(np.arccos(gram[ii, jj]))
        rec_f[k] = inputs.f
        rec_it[k] = alloc.iterations
        rec_status.append(alloc.status.value)
        rec_time[k] = elapsed
        rec_ul[k] = u_load

        try:
            s, forces = rk4_step(params, s, inputs, dt, with_forces=True)
        except SingularMassMatrix as exc:
            raise SimulationDiverged(k, t) from exc
        rec_ta[k] = forces.T
        rec_slack[k] = forces.slack_flag

        if not (
            math.isfinite(s.x_load[0])
            and math.isfinite(s.x_load[1])
            and math.isfinite(s.x_load[2])
            and math.isfinite(s.v_load[2])
        ):
            raise SimulationDiverged(k, t)

    records = RunRecords(
        n=n,
        t=rec_t,
        x_load=rec_xl,
        x_ref=rec_xr,
        e_load=rec_el,
        T_actual=rec_ta,
        T_desired=rec_td,
        pair_angles_deg=rec_ang,
        f_id=rec_f,
        solver_iterations=rec_it,
        solver_status=rec_status,
        solve_time=rec_time,
        slack=rec_slack,
        u_load=rec_ul,
    )
    return records, compute_metrics(records)


def _nearest_rank(sorted_values: np.ndarray, q: float) -> float:
    idx = max(0, math.ceil(q * sorted_values.size) - 1)
    return float(sorted_values[idx])


def compute_metrics(records: RunRecords) -> MetricsReport:
    """Summary statistics over one run's records."""
    if len(records) == 0:
        raise EmptyRun("no records to summarize")
    err = np.linalg.norm(records.e_load, axis=1)
    total_tension = np.sum(np.abs(records.T_actual), axis=1)
    tension_cost = float(np.trapezoid(total_tension, records.t))
    spread = np.max(records.T_actual, axis=1) - np.min(records.T_actual, axis=1)
    times_sorted = np.sort(records.solve_time)
    peak_total = float(np.max(total_tension))
    avg_total = float(np.mean(total_tension))
    min_angle = (
        float(np.min(records.pair_angles_deg))
        if records.pair_angles_deg.size
        else None
    )
    mae = np.mean(np.abs(records.T_actual - records.T_desired), axis=0)
    return MetricsReport(
        rms_error_m=float(np.sqrt(np.mean(err * err))),
        max_error_m=float(np.max(err)),
        min_pairwise_angle_deg=min_angle,
        tension_cost_ns=tension_cost,
        tension_mean_n=[float(x) for x in np.mean(records.T_actual, axis=0)],
        tension_max_n=[float(x) for x in np.max(records.T_actual, axis=0)],
        tension_spread_mean_n=float(np.mean(spread)),
        peak_total_tension_n=peak_total,
        peak_to_average_tension=peak_total / avg_total if avg_total else math.inf,
        solver_time_mean_s=float(np.mean(records.solve_time)),
        solver_time_p99_s=_nearest_rank(times_sorted, 0.99),
        solver_time_max_s=float(times_sorted[-1]),
        solver_iterations_mean=float(np.mean(records.solver_iterations)),
        slack_events=int(np.sum(records.slack)),
        desired_actual_tension_mae_n=[float(x) for x in mae],
    )


def sweep_mu(cfg: ScenarioConfig, mu_values: list[float]) -> list[tuple[float, MetricsReport]]:
    """Independent full runs differing only in mu, in the given order."""
    if not mu_values:
        raise ValueError("mu sweep needs at least one value")
    results = []
    for mu in mu_values:
        sub = cfg.model_copy(deep=True)
        sub.alloc.mu = mu
        try:
            _, metrics = run_simulation(sub)
        except Exception as exc:
            raise RuntimeError(f"sweep failed at mu = {mu}: {exc}") from exc
        results.append((mu, metrics))
    return results


def bench_allocator(cfg: ScenarioConfig, samples: int = 1000) -> dict:
    """Replay a recorded demand sequence through the solver with warm starts,
    timing each cycle with a monotonic clock (solver call only)."""
    if samples < 1000:
        raise ValueError("benchmark needs at least 1000 samples")
    run_cfg = cfg.model_copy(deep=True)
    run_cfg.alloc.kind = "sqp"
    records, _ = run_simulation(run_cfg)
    demands = records.u_load
    if demands.shape[0] < samples:
        reps = math.ceil(samples / demands.shape[0])
        demands = np.tile(demands, (reps, 1))
    demands = demands[:samples]

    settings = run_cfg.alloc.sqp.to_settings()
    n = run_cfg.plant.n
    warm: AllocSolution | None = None
    elapsed = np.empty(samples)
    iters = np.empty(samples)
    for k in range(samples):
        t0 = time.perf_counter()
        sol = sqp_solve(AllocProblem(demands[k], n=n, mu=run_cfg.alloc.mu, prev=warm), settings)
        elapsed[k] = time.perf_counter() - t0
        iters[k] = sol.iterations
        warm = sol
    ordered = np.sort(elapsed)
    return {
        "samples": samples,
        "mean_s": float(np.mean(elapsed)),
        "p99_s": _nearest_rank(ordered, 0.99),
        "max_s": float(ordered[-1]),
        "mean_iterations": float(np.mean(iters)),
    }


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def timeseries_csv(records: RunRecords) -> str:
    """Render the records as CSV, one row per tick, 9 significant digits."""
    n = records.n
    header = ["t"]
    header += [f"x_load_{c}" for c in "xyz"]
    header += [f"x_ref_{c}" for c in "xyz"]
    header += [f"e_load_{c}" for c in "xyz"]
    header += [f"T_actual_{i + 1}" for i in range(n)]
    header += [f"T_desired_{i + 1}" for i in range(n)]
    header += [f"theta_{lbl}_deg" for lbl in records.pair_labels]
    header += [f"f_id_{i + 1}" for i in range(n)]
    header += ["solver_iterations", "solver_status", "solve_time"]
    header += [f"slack_{i + 1}" for i in range(n)]

    lines = [",".join(header)]
    for k in range(len(records)):
        row = [_fmt(records.t[k])]
        row += [_fmt(v) for v in records.x_load[k]]
        row += [_fmt(v) for v in records.x_ref[k]]
        row += [_fmt(v) for v in records.e_load[k]]
        row += [_fmt(v) for v in records.T_actual[k]]
        row += [_fmt(v) for v in records.T_desired[k]]
        row += [_fmt(v) for v in records.pair_angles_deg[k]]
        row += [_fmt(v) for v in records.f_id[k]]
        row.append(str(int(records.solver_iterations[k])))
        row.append(records.solver_status[k])
        row.append(_fmt(records.solve_time[k]))
        row += [str(int(v)) for v in records.slack[k]]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def write_run_outputs(
    records: RunRecords, metrics: MetricsReport, out_dir: str | Path, cfg: ScenarioConfig
) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / cfg.output.timeseries
    csv_path.write_text(timeseries_csv(records))
    metrics_path = out / cfg.output.metrics
    metrics_path.write_text(json.dumps(metrics.to_dict(), indent=2) + "\n")
    return csv_path, metrics_path


def write_sweep_output(
    results: list[tuple[float, MetricsReport]], out_dir: str | Path, cfg: ScenarioConfig
) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    payload = [{"mu": mu, "metrics": m.to_dict()} for mu, m in results]
    path = out / cfg.output.sweep
    path.write_text(json.dumps(payload, indent=2) + "\n")
    return path
