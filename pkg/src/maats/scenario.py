"""Run configuration (JSON, validated) and reference-trajectory generation.

The defaults describe the stock four-quadrotor team: 0.5 kg UAVs with
diagonal inertia (2.1, 1.87, 3.97)e-2 kg m^2 carrying a 0.225 kg payload on
1.0 m cables, integrated at 1 ms for 20 s, allocator weight mu = 0.15.
The default mission is an ascending spiral (radius 1 m, one revolution per
10 s, 0.05 m/s climb) chosen for gentle accelerations.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .allocator import SqpSettings
from .control import LoadGains, ReferencePoint, UavGains
from .dynamics import PlantParams


class ConfigError(ValueError):
    """Configuration document failed validation; message names the keys."""


def _as_diag(value: float | list[float], name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        arr = np.full(3, float(arr))
    if arr.shape != (3,):
        raise ValueError(f"{name} must be a scalar or a 3-vector")
    return arr


class PlantConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n: int = 4
    m_load: float = 0.225
    m_uav: float | list[float] = 0.5
    inertia: list[float] | list[list[float]] = [0.021, 0.0187, 0.0397]
    cable_length: float | list[float] = 1.0
    g: float = 9.81

    @model_validator(mode="after")
    def _check(self):
        if self.n < 1:
            raise ValueError("plant.n must be >= 1")
        if self.m_load <= 0:
            raise ValueError("plant.m_load must be positive")
        self.to_params()  # full shape/positivity validation
        return self

    def to_params(self) -> PlantParams:
        m = np.asarray(self.m_uav, dtype=float)
        if m.ndim == 0:
            m = np.full(self.n, float(m))
        inertia = np.asarray(self.inertia, dtype=float)
        if inertia.ndim == 1:
            inertia = np.tile(inertia, (self.n, 1))
        length = np.asarray(self.cable_length, dtype=float)
        if length.ndim == 0:
            length = np.full(self.n, float(length))
        return PlantParams(
            n=self.n,
            m_load=self.m_load,
            m_uav=m,
            inertia=inertia,
            cable_length=length,
            g=self.g,
        )


class LoadGainsConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kp: float | list[float] = 8.0
    kd: float | list[float] = 2.0
    ki: float | list[float] = 0.0
    integral_limit: float = 1.0

    def to_gains(self) -> LoadGains:
        return LoadGains(
            kp=_as_diag(self.kp, "gains.load.kp"),
            kd=_as_diag(self.kd, "gains.load.kd"),
            ki=_as_diag(self.ki, "gains.load.ki"),
        )


class UavGainsConfig(BaseModel):
    """Position gains follow the published tuning; the attitude gains are a
    local tuning choice sized to critically damp the attitude loop roughly a
    decade above the position loop (documented here, not taken from anywhere)."""

    model_config = ConfigDict(extra="forbid")

    kp: float | list[float] = 40.0
    kd: float | list[float] = 10.0
    ki: float | list[float] = 2.0
    rho: float | list[float] = 50.0
    kd_att: float | list[float] = 5.0
    beta: float | list[float] = 0.1
    gamma: float | list[float] = 10.0
    sat_limit: float = 1.0
    integral_limit: float = 1.0
    rate_filter_cutoff_hz: float = 50.0

    def to_gains(self) -> UavGains:
        return UavGains(
            kp=_as_diag(self.kp, "gains.uav.kp"),
            kd=_as_diag(self.kd, "gains.uav.kd"),
            ki=_as_diag(self.ki, "gains.uav.ki"),
            rho=_as_diag(self.rho, "gains.uav.rho"),
            kd_att=_as_diag(self.kd_att, "gains.uav.kd_att"),
            beta=_as_diag(self.beta, "gains.uav.beta"),
            gamma=_as_diag(self.gamma, "gains.uav.gamma"),
            sat_limit=self.sat_limit,
            integral_limit=self.integral_limit,
            rate_filter_cutoff_hz=self.rate_filter_cutoff_hz,
        )


class GainsConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    load: LoadGainsConfig = Field(default_factory=LoadGainsConfig)
    uav: UavGainsConfig = Field(default_factory=UavGainsConfig)


class SqpConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kkt_tol: float = 1e-8
    max_iter: int = 50
    hessian_reg_floor: float = 1e-8
    armijo_c: float = 1e-4
    backtrack_factor: float = 0.5
    penalty_margin: float = 2.0
    penalty_floor: float = 1.0
    min_step: float = 1e-12
    cone_half_angle_deg: float = 35.0

    def to_settings(self) -> SqpSettings:
        return SqpSettings(**self.model_dump())


class AllocConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["sqp", "baseline"] = "sqp"
    mu: float = 0.15
    sqp: SqpConfig = Field(default_factory=SqpConfig)
    baseline_cone_half_angle_deg: float = 35.0

    @field_validator("mu")
    @classmethod
    def _mu_nonnegative(cls, v):
        if v < 0:
            raise ValueError("alloc.mu must be >= 0")
        return v


class TrajectoryConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["hover", "spiral"] = "spiral"
    radius: float = 1.0
    angular_rate: float = math.pi / 5.0
    climb_rate: float = 0.05
    center: list[float] = [0.0, 0.0, 1.0]
    phase: float = 0.0

    @model_validator(mode="after")
    def _check(self):
        if self.radius < 0:
            raise ValueError("trajectory.radius must be >= 0")
        if len(self.center) != 3:
            raise ValueError("trajectory.center must be a 3-vector")
        return self


class OutputConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    directory: str = "out"
    timeseries: str = "timeseries.csv"
    metrics: str = "metrics.json"
    sweep: str = "sweep.json"


class ScenarioConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    plant: PlantConfig = Field(default_factory=PlantConfig)
    gains: GainsConfig = Field(default_factory=GainsConfig)
    alloc: AllocConfig = Field(default_factory=AllocConfig)
    trajectory: TrajectoryConfig = Field(default_factory=TrajectoryConfig)
    duration: float = 20.0
    dt: float = 1e-3
    output: OutputConfig = Field(default_factory=OutputConfig)

    @model_validator(mode="after")
    def _check(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.duration < self.dt:
            raise ValueError("duration must be at least one step")
        return self

    def make_trajectory(self) -> "SpiralTrajectory":
        t = self.trajectory
        if t.kind == "hover":
            return SpiralTrajectory(
                radius=0.0,
                angular_rate=0.0,
                climb_rate=0.0,
                center=np.asarray(t.center, dtype=float),
                phase=0.0,
            )
        return SpiralTrajectory(
            radius=t.radius,
            angular_rate=t.angular_rate,
            climb_rate=t.climb_rate,
            center=np.asarray(t.center, dtype=float),
            phase=t.phase,
        )


def load_config(text: str) -> ScenarioConfig:
    """Parse and validate a JSON configuration document.

    An empty document (or "{}") yields the full default setup.  Validation
    problems raise ConfigError naming the offending keys.
    """
    stripped = text.strip()
    if not stripped:
        stripped = "{}"
    try:
        raw = json.loads(stripped)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"not valid JSON: {exc}") from exc
    try:
        return ScenarioConfig.model_validate(raw)
    except Exception as exc:  # pydantic.ValidationError formats key paths
        raise ConfigError(f"invalid configuration: {exc}") from exc


def dump_config(cfg: ScenarioConfig) -> str:
    return json.dumps(cfg.model_dump(), indent=2)


@dataclass
class SpiralTrajectory:
    """Ascending spiral with analytically consistent derivatives.

    position = center + (r cos(w t + phase), r sin(w t + phase), climb * t);
    a hover point is the degenerate r = w = climb = 0 case.
    """

    radius: float
    angular_rate: float
    climb_rate: float
    center: np.ndarray
    phase: float = 0.0

    def at(self, t: float) -> ReferencePoint:
        r, w = self.radius, self.angular_rate
        ang = w * t + self.phase
        c, s = math.cos(ang), math.sin(ang)
        pos = self.center + np.array([r * c, r * s, self.climb_rate * t])
        vel = np.array([-r * w * s, r * w * c, self.climb_rate])
        acc = np.array([-r * w * w * c, -r * w * w * s, 0.0])
        return ReferencePoint(pos=pos, vel=vel, acc=acc)


def spiral_reference(params: SpiralTrajectory, t: float) -> ReferencePoint:
    """Functional alias for SpiralTrajectory.at."""
    return params.at(t)
