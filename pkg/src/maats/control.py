"""Hierarchical controllers around the allocator: load force, per-UAV
position control with attitude-reference extraction, quaternion attitude law.

All three laws are PID-style with diagonal gains.  The attitude reference is
extracted from the desired thrust direction assuming zero desired yaw; the
reference body rate comes from a filtered finite difference of that direction
(backward difference at the control rate through a one-pole low pass), which
avoids differentiating through the allocator algebraically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .mathcore import (
    E3,
    EPS_NORM,
    quat_conj,
    quat_mul,
    quat_rotate_conj,
)

EPS_FLIP = 1e-6  # guard on the sqrt(2*uhat_z + 2) attitude-map denominator

ALPHA_RATE_CUTOFF_HZ = 2.0  # allocation-direction rate feedforward low pass


class DegenerateThrust(ArithmeticError):
    """Demanded UAV force has negligible norm; caller holds the last command."""


class AttitudeSingularity(ArithmeticError):
    """Thrust demanded straight down; the attitude map is undefined there."""


@dataclass
class LoadGains:
    """Diagonal PID gains for the load trajectory loop."""

    kp: np.ndarray
    kd: np.ndarray
    ki: np.ndarray

    def __post_init__(self) -> None:
        self.kp = np.asarray(self.kp, dtype=float)
        self.kd = np.asarray(self.kd, dtype=float)
        self.ki = np.asarray(self.ki, dtype=float)
        if np.any(self.kp <= 0) or np.any(self.kd <= 0) or np.any(self.ki < 0):
            raise ValueError("load gains must be positive (ki may be zero)")


@dataclass
class UavGains:
    """Diagonal gains for the UAV position loop and the attitude loop."""

    kp: np.ndarray
    kd: np.ndarray
    ki: np.ndarray
    rho: np.ndarray
    kd_att: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    sat_limit: float = 1.0
    integral_limit: float = 1.0  # clamp on the integral's force contribution, N
    rate_filter_cutoff_hz: float = 50.0

    def __post_init__(self) -> None:
        for name in ("kp", "kd", "ki", "rho", "kd_att", "beta", "gamma"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float))
        positive = [self.kp, self.kd, self.rho, self.kd_att, self.beta, self.gamma]
        if any(np.any(g <= 0) for g in positive) or np.any(self.ki < 0):
            raise ValueError("UAV gains must be positive (ki may be zero)")
        if self.sat_limit <= 0 or self.integral_limit <= 0:
            raise ValueError("saturation and integral limits must be positive")


@dataclass
class ReferencePoint:
    """Desired load position, velocity, acceleration at one instant."""

    pos: np.ndarray
    vel: np.ndarray
    acc: np.ndarray


@dataclass
class ControlCommand:
    """Per-UAV outputs: thrust magnitude, attitude/body-rate reference, torque."""

    f_id: float
    q_id: np.ndarray
    omega_id: np.ndarray
    tau: np.ndarray = field(default_factory=lambda: np.zeros(3))


@dataclass
class ControllerState:
    """Mutable loop-owned state: integrals, previous samples, filter memory."""

    int_e_load: np.ndarray
    prev_e_load: np.ndarray | None
    int_e_uav: np.ndarray
    prev_e_uav: np.ndarray | None
    prev_uhat: np.ndarray | None
    uhat_rate: np.ndarray
    prev_qid: np.ndarray | None
    prev_alpha_id: np.ndarray | None
    alpha_id_rate: np.ndarray

    @classmethod
    def initial(cls, n: int) -> "ControllerState":
        return cls(
            int_e_load=np.zeros(3),
            prev_e_load=None,
            int_e_uav=np.zeros((n, 3)),
            prev_e_uav=None,
            prev_uhat=None,
            uhat_rate=np.zeros((n, 3)),
            prev_qid=None,
            prev_alpha_id=None,
            alpha_id_rate=np.zeros((n, 3)),
        )


def _advance_integral(
    integral: np.ndarray,
    error: np.ndarray,
    prev_error: np.ndarray | None,
    ki: np.ndarray,
    dt: float,
    force_limit: float,
) -> np.ndarray:
    """Trapezoid update with an anti-windup clamp on ki * integral."""
    increment = dt * error if prev_error is None else 0.5 * dt * (error + prev_error)
    integral = integral + increment
    bound = np.where(ki > 0.0, force_limit / np.where(ki > 0.0, ki, 1.0), np.inf)
    return np.clip(integral, -bound, bound)


def load_control(
    gains: LoadGains,
    m_load: float,
    gravity: float,
    s,
    ref: ReferencePoint,
    cs: ControllerState,
    dt: float,
    integral_limit: float = 1.0,
) -> np.ndarray:
    """Total demanded cable force on the load (virtual control).

    u_L = -m_L (g e3 + a_ref) - kp e - kd e_dot - ki int(e) with
    e = x_load - x_ref.  Advances the integral state in place.
    """
    e = s.x_load - ref.pos
    e_dot = s.v_load - ref.vel
    cs.int_e_load = _advance_integral(
        cs.int_e_load, e, cs.prev_e_load, gains.ki, dt, integral_limit
    )
    cs.prev_e_load = e
    return (
        -m_load * (gravity * E3 + ref.acc)
        - gains.kp * e
        - gains.kd * e_dot
        - gains.ki * cs.int_e_load
    )


def thrust_attitude(uhat: np.ndarray) -> np.ndarray:
    """Zero-yaw attitude whose body z-axis points along ``uhat``.

    q = [s/2, -uhat_y/s, uhat_x/s, 0] with s = sqrt(2 uhat_z + 2); exactly
    unit for unit input, undefined as uhat_z -> -1.
    """
    root = 2.0 * uhat[2] + 2.0
    if root <= 2.0 * EPS_FLIP:
        raise AttitudeSingularity("thrust direction too close to straight down")
    s = math.sqrt(root)
    return np.array([0.5 * s, -uhat[1] / s, uhat[0] / s, 0.0])


def position_control(
    gains: UavGains,
    m_uav: float,
    gravity: float,
    cable_length: float,
    T_id: float,
    alpha_id: np.ndarray,
    s,
    ref: ReferencePoint,
    cs: ControllerState,
    i: int,
    dt: float,
) -> ControlCommand:
    """Thrust magnitude plus attitude/body-rate reference for UAV ``i``.

    The UAV's desired position rides the allocated direction: x_id = x_ref +
    L alpha_id.  The demanded force compensates weight, the reference
    acceleration, and the allocated cable pull, plus PID position feedback.
    Updates the per-UAV integral, direction-rate filter, and sign-continuity
    state in place.
    """
    x_i = s.x_load + cable_length * s.alpha[i]
    v_i = s.v_load + cable_length * np.cross(s.omega_cable[i], s.alpha[i])
    e = x_i - (ref.pos + cable_length * alpha_id)
    # target velocity treats the allocated direction as quasi-static; feeding
    # a differentiated alpha_id back in closes an unstable loop through the
    # allocator (the direction is itself a function of the tracking error)
    e_dot = v_i - ref.vel

    rc = 1.0 / (2.0 * math.pi * gains.rate_filter_cutoff_hz)
    blend = dt / (dt + rc)

    prev = None if cs.prev_e_uav is None else cs.prev_e_uav[i]
    new_int = _advance_integral(
        cs.int_e_uav[i], e, prev, gains.ki, dt, gains.integral_limit
    )

    u = (
        m_uav * (gravity * E3 + ref.acc)
        + T_id * alpha_id
        - gains.kp * e
        - gains.kd * e_dot
        - gains.ki * new_int
    )
    f_id = float(np.linalg.norm(u))
    if f_id <= EPS_NORM:
        raise DegenerateThrust(f"UAV {i}: demanded force norm {f_id:.3e}")
    uhat = u / f_id

    q_id = thrust_attitude(uhat)
    if cs.prev_qid is not None and float(q_id @ cs.prev_qid[i]) < 0.0:
        q_id = -q_id

    if cs.prev_uhat is None:
        rate = cs.uhat_rate[i]
    else:
        raw = (uhat - cs.prev_uhat[i]) / dt
        rate = cs.uhat_rate[i] + blend * (raw - cs.uhat_rate[i])
    omega_world = np.cross(uhat, rate)
    omega_id = quat_rotate_conj(q_id, omega_world)

    # commit state only after all failure points have passed
    cs.int_e_uav[i] = new_int
    if cs.prev_e_uav is None:
        cs.prev_e_uav = np.zeros_like(cs.int_e_uav)
    cs.prev_e_uav[i] = e
    if cs.prev_uhat is None:
        cs.prev_uhat = np.tile(E3, (cs.int_e_uav.shape[0], 1))
    cs.prev_uhat[i] = uhat
    cs.uhat_rate[i] = rate
    if cs.prev_alpha_id is None:
        cs.prev_alpha_id = np.tile(E3, (cs.int_e_uav.shape[0], 1))
    cs.prev_alpha_id[i] = alpha_id
    cs.alpha_id_rate[i] = alpha_rate
    if cs.prev_qid is None:
        cs.prev_qid = np.tile(np.array([1.0, 0.0, 0.0, 0.0]), (cs.int_e_uav.shape[0], 1))
    cs.prev_qid[i] = q_id

    return ControlCommand(f_id=f_id, q_id=q_id, omega_id=omega_id)


def attitude_control(gains: UavGains, s, cmd: ControlCommand, i: int) -> np.ndarray:
    """Torque from the quaternion error manifold.

    q_e = q_id^* (x) q_i with its scalar part kept nonnegative (shortest
    geodesic; makes the law invariant to the sign of q_id), s = omega_e +
    rho * vec(q_e), tau = -Kd s - beta sat(gamma s).
    """
    q_e = quat_mul(quat_conj(cmd.q_id), s.quat[i])
    if q_e[0] < 0.0:
        q_e = -q_e
    omega_e = s.omega_body[i] - cmd.omega_id
    s_vec = omega_e + gains.rho * q_e[1:]
    sat = np.clip(gains.gamma * s_vec, -gains.sat_limit, gains.sat_limit)
    return -gains.kd_att * s_vec - gains.beta * sat
