"""Coupled load–cable–UAV rigid-link dynamics with a fixed-step RK4 integrator.

The plant is written in generalized coordinates (load position, unit cable
directions, cable angular velocities, UAV attitudes and body rates) so the
rigid massless-cable constraint holds exactly by construction; tension is the
computed constraint force, never a spring force.

Direction convention: ``alpha[i]`` points from the load to UAV ``i`` and the
UAV position is the derived quantity ``x_i = x_load + L_i * alpha[i]``.  With
that convention the cable pulls the UAV along ``-alpha`` and the load along
``+alpha``, so a hovering team has ``alpha_z > 0`` and positive tension.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mathcore import (
    E3,
    normalize_rows,
    quat_derivative_batch,
    quat_rotate_e3_batch,
)


class SingularMassMatrix(ArithmeticError):
    """Load mass-matrix solve failed; guards NaN propagation into the state."""


@dataclass
class PlantParams:
    """Physical constants: agent count, masses, inertias, cable lengths, gravity.

    ``inertia`` holds the diagonal of each UAV inertia tensor, shape (n, 3).
    """

    n: int
    m_load: float
    m_uav: np.ndarray
    inertia: np.ndarray
    cable_length: np.ndarray
    g: float = 9.81

    def __post_init__(self) -> None:
        self.m_uav = np.asarray(self.m_uav, dtype=float)
        self.inertia = np.asarray(self.inertia, dtype=float)
        self.cable_length = np.asarray(self.cable_length, dtype=float)
        if self.n < 1:
            raise ValueError("agent count must be >= 1")
        if self.m_load <= 0.0:
            raise ValueError("load mass must be positive")
        if self.m_uav.shape != (self.n,) or np.any(self.m_uav <= 0.0):
            raise ValueError("need n positive UAV masses")
        if self.inertia.shape != (self.n, 3) or np.any(self.inertia <= 0.0):
            raise ValueError("need (n, 3) positive inertia diagonals")
        if self.cable_length.shape != (self.n,) or np.any(self.cable_length <= 0.0):
            raise ValueError("need n positive cable lengths")


@dataclass
class PlantState:
    """Generalized coordinates of the coupled system.

    Invariants (restored after every integration step): each ``alpha`` row is
    unit; each ``omega_cable`` row is orthogonal to its ``alpha`` row; each
    ``quat`` row is a unit quaternion [w, x, y, z].
    """

    x_load: np.ndarray
    v_load: np.ndarray
    alpha: np.ndarray
    omega_cable: np.ndarray
    quat: np.ndarray
    omega_body: np.ndarray

    def copy(self) -> "PlantState":
        return PlantState(
            self.x_load.copy(),
            self.v_load.copy(),
            self.alpha.copy(),
            self.omega_cable.copy(),
            self.quat.copy(),
            self.omega_body.copy(),
        )


@dataclass
class PlantInputs:
    """Zero-order-hold controls: thrust magnitudes (n,) and body torques (n, 3)."""

    f: np.ndarray
    tau: np.ndarray


@dataclass
class CableForces:
    """Rigid-link constraint forces; negative tension marks a slack cable."""

    T: np.ndarray
    slack_flag: np.ndarray


def _cross_rows(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise cross product; np.cross has 2x the overhead at these sizes."""
    a0, a1, a2 = a[:, 0], a[:, 1], a[:, 2]
    b0, b1, b2 = b[:, 0], b[:, 1], b[:, 2]
    return np.stack([a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0], axis=1)


def _derivatives(
    p: PlantParams,
    x_load: np.ndarray,
    v_load: np.ndarray,
    alpha: np.ndarray,
    omega_cable: np.ndarray,
    quat: np.ndarray,
    omega_body: np.ndarray,
    f: np.ndarray,
    tau: np.ndarray,
):
    """Time derivatives of all generalized coordinates plus cable tensions.

    Eliminating the rigid-link constraint gives a single 3x3 solve for the
    load acceleration:

        (m_L I + sum_i m_i a_i a_i^T) aL
            = -m_L g e3 + sum_i a_i (a_i . F_i + m_i L_i |a_i_dot|^2)

    with F_i the thrust-plus-gravity force on UAV i, followed by

        T_i = a_i . F_i - m_i a_i . aL + m_i L_i |a_i_dot|^2.

    The sign of the centripetal |a_i_dot|^2 terms is pinned by the constraint
    level a_i . a_i_ddot = -|a_i_dot|^2 (a whirling cable is in tension) and
    is verified in tests by the Newton's-third-law residual and by energy
    conservation of an unforced pendulum.
    """
    m = p.m_uav
    length = p.cable_length

    thrust_dir = quat_rotate_e3_batch(quat)
    force = f[:, None] * thrust_dir
    force[:, 2] -= m * p.g

    alpha_dot = _cross_rows(omega_cable, alpha)
    rate_sq = np.einsum("ij,ij->i", alpha_dot, alpha_dot)
    axial_force = np.einsum("ij,ij->i", alpha, force)

    mass_matrix = p.m_load * np.eye(3) + (m[:, None] * alpha).T @ alpha
    rhs = alpha.T @ (axial_force + m * length * rate_sq)
    rhs[2] -= p.m_load * p.g
    try:
        a_load = np.linalg.solve(mass_matrix, rhs)
    except np.linalg.LinAlgError as exc:  # unreachable for positive masses
        raise SingularMassMatrix(str(exc)) from exc
    if not np.all(np.isfinite(a_load)):
        raise SingularMassMatrix("non-finite load acceleration")

    tension = axial_force - m * (alpha @ a_load) + m * length * rate_sq
    alpha_ddot = ((force - tension[:, None] * alpha) / m[:, None] - a_load) / length[:, None]
    omega_cable_dot = _cross_rows(alpha, alpha_ddot)

    quat_dot = quat_derivative_batch(quat, omega_body)
    omega_body_dot = (tau - _cross_rows(omega_body, p.inertia * omega_body)) / p.inertia

    return v_load, a_load, alpha_dot, omega_cable_dot, quat_dot, omega_body_dot, tension, alpha_ddot


def constrained_accelerations(
    p: PlantParams, s: PlantState, u: PlantInputs
) -> tuple[np.ndarray, np.ndarray, np.ndarray, CableForces]:
    """Load acceleration, cable direction accelerations, body-rate derivatives
    and the rigid-link tensions implied by the current state and inputs."""
    (_, a_load, _, _, _, omega_body_dot, tension, alpha_ddot) = _derivatives(
        p, s.x_load, s.v_load, s.alpha, s.omega_cable, s.quat, s.omega_body, u.f, u.tau
    )
    return a_load, alpha_ddot, omega_body_dot, CableForces(tension, tension < 0.0)


def rk4_step(
    p: PlantParams,
    s: PlantState,
    u: PlantInputs,
    dt: float,
    with_forces: bool = False,
) -> PlantState | tuple[PlantState, CableForces]:
    """Classic fourth-order step with inputs held constant (zero-order hold).

    After the step, cable directions and quaternions are renormalized and the
    cable angular velocities re-projected orthogonal to their directions.
    With ``with_forces=True`` also returns the cable forces evaluated at the
    start of the interval (the first stage), saving the caller a redundant
    derivative evaluation when logging tensions every tick.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")

    y0 = (s.x_load, s.v_load, s.alpha, s.omega_cable, s.quat, s.omega_body)

    def deriv(y):
        return _derivatives(p, *y, u.f, u.tau)

    d1 = deriv(y0)
    k1 = d1[:6]
    h = 0.5 * dt
    k2 = deriv(tuple(a + h * b for a, b in zip(y0, k1)))[:6]
    k3 = deriv(tuple(a + h * b for a, b in zip(y0, k2)))[:6]
    k4 = deriv(tuple(a + dt * b for a, b in zip(y0, k3)))[:6]

    w = dt / 6.0
    x_load, v_load, alpha, omega_cable, quat, omega_body = (
        a + w * (b1 + 2.0 * (b2 + b3) + b4)
        for a, b1, b2, b3, b4 in zip(y0, k1, k2, k3, k4)
    )

    alpha = normalize_rows(alpha)
    quat = normalize_rows(quat)
    omega_cable = omega_cable - np.einsum("ij,ij->i", omega_cable, alpha)[:, None] * alpha

    nxt = PlantState(x_load, v_load, alpha, omega_cable, quat, omega_body)
    if with_forces:
        tension = d1[6]
        return nxt, CableForces(tension, tension < 0.0)
    return nxt


def uav_positions(p: PlantParams, s: PlantState) -> np.ndarray:
    """Derived UAV positions x_i = x_load + L_i * alpha_i, shape (n, 3)."""
    return s.x_load + p.cable_length[:, None] * s.alpha


def uav_velocities(p: PlantParams, s: PlantState) -> np.ndarray:
    """Derived UAV velocities v_i = v_load + L_i * (omega_i x alpha_i)."""
    return s.v_load + p.cable_length[:, None] * np.cross(s.omega_cable, s.alpha)
