"""Non-optimized reference allocator: tensions on prescribed directions.

The baseline never optimizes directions.  Given a direction set (by default a
cone of fixed half-angle around +z, azimuths equally spaced, fixed in the
world frame), it solves the minimum-norm tension least-squares problem

    min |T|_2  s.t.  sum T_i alpha_i = -u_L

clamping negative components to zero and re-solving on the remaining support
until all tensions are nonnegative.
"""

from __future__ import annotations

import math

import numpy as np

from ..mathcore import E3
from .problem import AllocSolution, AllocStatus


class BaselineInfeasible(RuntimeError):
    """The prescribed direction pattern cannot produce the required resultant."""


def fixed_cone_directions(
    n: int, half_angle_deg: float = 35.0, axis: np.ndarray = E3
) -> np.ndarray:
    """World-fixed cone pattern: n unit directions at equal azimuths."""
    theta = math.radians(half_angle_deg)
    phis = 2.0 * math.pi * np.arange(n) / n
    b1 = np.array([1.0, 0.0, 0.0])
    b2 = np.array([0.0, 1.0, 0.0])
    if abs(axis[2]) < 0.9:  # keep the basis deterministic for tilted axes
        b1 = np.cross(np.array([0.0, 0.0, 1.0]), axis)
        b1 /= np.linalg.norm(b1)
        b2 = np.cross(axis, b1)
    alpha = (
        math.cos(theta) * axis[None, :]
        + math.sin(theta) * (np.cos(phis)[:, None] * b1 + np.sin(phis)[:, None] * b2)
    )
    return alpha / np.linalg.norm(alpha, axis=1, keepdims=True)


def baseline_allocate(
    u_load: np.ndarray,
    n: int,
    fixed_cone_angle_deg: float = 35.0,
    directions: np.ndarray | None = None,
    residual_tol: float = 1e-6,
    strict: bool = True,
) -> AllocSolution:
    """Least-squares tensions on fixed directions with clamp-then-resolve.

    ``directions`` overrides the default world-fixed cone; the closed-loop
    harness passes the measured cable directions here so the baseline tracks
    whatever geometry the plant currently has (no direction regulation).

    When the clamped pattern cannot produce the resultant, ``strict=True``
    raises BaselineInfeasible while ``strict=False`` returns the best-effort
    clamped solution tagged ``fallback`` (the control loop must never stall;
    the unmet force shows up as tracking error instead).
    """
    u_load = np.asarray(u_load, dtype=float)
    if directions is None:
        directions = fixed_cone_directions(n, fixed_cone_angle_deg)
    alpha = directions / np.linalg.norm(directions, axis=1, keepdims=True)
    demand = -u_load
    tol = residual_tol * max(1.0, float(np.linalg.norm(u_load)))

    def emit(T: np.ndarray, dropped: int, status: AllocStatus) -> AllocSolution:
        return AllocSolution(
            T=T,
            alpha=alpha.copy(),
            kkt_residual=float(np.linalg.norm(T @ alpha + u_load)),
            iterations=dropped,
            status=status,
        )

    support = np.arange(n)
    best: np.ndarray | None = None
    for _ in range(n + 1):
        if support.size == 0:
            break
        D = alpha[support].T  # 3 x |support|
        T_s, *_ = np.linalg.lstsq(D, demand, rcond=None)
        clamped = np.zeros(n)
        clamped[support] = np.maximum(T_s, 0.0)
        best = clamped
        residual = float(np.linalg.norm(D @ T_s - demand))
        if residual > tol:
            if strict:
                raise BaselineInfeasible(
                    f"pattern cannot produce resultant (residual {residual:.3e} N)"
                )
            return emit(clamped, int(n - support.size), AllocStatus.FALLBACK)
        if np.all(T_s >= -1e-12):
            return emit(clamped, int(n - support.size), AllocStatus.CONVERGED)
        support = support[T_s >= -1e-12]
    if strict or best is None:
        raise BaselineInfeasible("all tensions clamped, resultant unmet")
    return emit(best, n, AllocStatus.FALLBACK)
