"""FastAPI application exposing allocation, simulation, sweep, and benchmark."""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import __version__
from ..allocator import AllocProblem, AllocSolution, sqp_solve
from ..harness import (
    SimulationDiverged,
    bench_allocator,
    run_simulation,
    sweep_mu,
    timeseries_csv,
)
from ..mathcore import DegenerateNorm
from .schemas import (
    AllocateRequest,
    AllocateResponse,
    BenchRequest,
    BenchResponse,
    HealthResponse,
    MetricsModel,
    SimulateRequest,
    SimulateResponse,
    SweepEntry,
    SweepRequest,
    SweepResponse,
)


def create_app() -> FastAPI:
    app = FastAPI(
        title="maats",
        description="Cable-tension allocation and closed-loop transport simulation",
        version=__version__,
    )

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/allocate", response_model=AllocateResponse)
    def allocate(req: AllocateRequest) -> AllocateResponse:
        prev = None
        if req.warm_start is not None:
            tensions = np.asarray(req.warm_start.tensions, dtype=float)
            directions = np.asarray(req.warm_start.directions, dtype=float)
            if tensions.shape != (req.n,) or directions.shape != (req.n, 3):
                raise HTTPException(422, "warm start shapes must be (n,) and (n, 3)")
            prev = AllocSolution(T=tensions, alpha=directions)
        try:
            problem = AllocProblem(
                np.asarray(req.u_load, dtype=float), n=req.n, mu=req.mu, prev=prev
            )
        except ValueError as exc:
            raise HTTPException(422, str(exc)) from exc
        try:
            sol = sqp_solve(problem)
        except DegenerateNorm as exc:
            raise HTTPException(422, f"demand too small to allocate: {exc}") from exc
        return AllocateResponse(
            tensions=[float(x) for x in sol.T],
            directions=[[float(v) for v in row] for row in sol.alpha],
            kkt_residual=sol.kkt_residual,
            iterations=sol.iterations,
            status=sol.status.value,
            solve_time_s=sol.solve_time,
        )

    @app.post("/simulate", response_model=SimulateResponse)
    def simulate(req: SimulateRequest) -> SimulateResponse:
        try:
            records, metrics = run_simulation(req.config)
        except SimulationDiverged as exc:
            raise HTTPException(422, str(exc)) from exc
        return SimulateResponse(
            metrics=MetricsModel(**metrics.to_dict()),
            timeseries_csv=timeseries_csv(records) if req.include_timeseries else None,
        )

    @app.post("/sweep", response_model=SweepResponse)
    def sweep(req: SweepRequest) -> SweepResponse:
        try:
            results = sweep_mu(req.config, req.mu_values)
        except (RuntimeError, ValueError) as exc:
            raise HTTPException(422, str(exc)) from exc
        return SweepResponse(
            results=[
                SweepEntry(mu=mu, metrics=MetricsModel(**m.to_dict()))
                for mu, m in results
            ]
        )

    @app.post("/bench", response_model=BenchResponse)
    def bench(req: BenchRequest) -> BenchResponse:
        try:
            out = bench_allocator(req.config, req.samples)
        except ValueError as exc:
            raise HTTPException(422, str(exc)) from exc
        return BenchResponse(**out)

    return app


app = create_app()
