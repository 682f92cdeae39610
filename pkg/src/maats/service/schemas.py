"""Request/response models for the HTTP API.

The simulation endpoints embed the full ScenarioConfig (itself a pydantic
model) so a request body is exactly a config document plus endpoint-specific
fields.
"""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field

from ..scenario import ScenarioConfig


class HealthResponse(BaseModel):
    status: str
    version: str


class AllocateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    u_load: list[float] = Field(min_length=3, max_length=3)
    n: int = 4
    mu: float = 0.15
    warm_start: WarmStart | None = None


class WarmStart(BaseModel):
    model_config = ConfigDict(extra="forbid")

    tensions: list[float]
    directions: list[list[float]]


class AllocateResponse(BaseModel):
    tensions: list[float]
    directions: list[list[float]]
    kkt_residual: float
    iterations: int
    status: str
    solve_time_s: float


class MetricsModel(BaseModel):
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
    desired_actual_tension_mae_n: list[float]


class SimulateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    config: ScenarioConfig = Field(default_factory=ScenarioConfig)
    include_timeseries: bool = True


class SimulateResponse(BaseModel):
    metrics: MetricsModel
    timeseries_csv: str | None


class SweepRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    config: ScenarioConfig = Field(default_factory=ScenarioConfig)
    mu_values: list[float] = Field(min_length=1)


class SweepEntry(BaseModel):
    mu: float
    metrics: MetricsModel


class SweepResponse(BaseModel):
    results: list[SweepEntry]


class BenchRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    config: ScenarioConfig = Field(default_factory=ScenarioConfig)
    samples: int = 1000


class BenchResponse(BaseModel):
    samples: int
    mean_s: float
    p99_s: float
    max_s: float
    mean_iterations: float


AllocateRequest.model_rebuild()
