"""Allocation NLP: decision layout, objective, constraints, and cold start.

Decision vector ``z`` of length 4n: ``z[:n]`` are tensions T_i,
``z[n:].reshape(n, 3)`` are the cable directions.  The problem solved is

    min  1/2 sum T_i^2 + mu * sum_{i<j} (alpha_i . alpha_j)^2
    s.t. sum T_i alpha_i + u_L = 0      (force balance, 3 rows)
         |alpha_i|^2 - 1 = 0            (unit norm, n rows)
         T_i >= 0                       (bounds, active-set handled)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..mathcore import normalize


class AllocStatus(str, Enum):
    CONVERGED = "converged"
    MAX_ITER = "max_iter"
    FALLBACK = "fallback"


@dataclass
class AllocSolution:
    """Tensions, unit directions, and solver diagnostics for one cycle."""

    T: np.ndarray
    alpha: np.ndarray
    kkt_residual: float = math.nan
    iterations: int = 0
    status: AllocStatus = AllocStatus.CONVERGED
    solve_time: float = 0.0


@dataclass
class AllocProblem:
    """One allocation instance: demanded load force, team size, penalty weight."""

    u_load: np.ndarray
    n: int
    mu: float
    prev: AllocSolution | None = None

    def __post_init__(self) -> None:
        self.u_load = np.asarray(self.u_load, dtype=float)
        if self.n < 1:
            raise ValueError("agent count must be >= 1")
        if self.mu < 0.0:
            raise ValueError("alignment weight must be >= 0")


@dataclass
class SqpSettings:
    """Solver knobs; defaults are tuned for the 1 kHz control loop.

    ``kkt_tol`` is applied relative to max(1, |u_L|).  The merit penalty is
    kept at ``penalty_margin`` times the largest multiplier magnitude, never
    below ``penalty_floor``.
    """

    kkt_tol: float = 1e-8
    max_iter: int = 50
    hessian_reg_floor: float = 1e-8
    armijo_c: float = 1e-4
    backtrack_factor: float = 0.5
    penalty_margin: float = 2.0
    penalty_floor: float = 1.0
    min_step: float = 1e-12
    cone_half_angle_deg: float = 35.0

    def __post_init__(self) -> None:
        if min(self.kkt_tol, self.hessian_reg_floor, self.armijo_c, self.min_step) <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not 0.0 < self.backtrack_factor < 1.0:
            raise ValueError("backtrack_factor must lie in (0, 1)")
        if self.penalty_margin <= 0 or self.penalty_floor <= 0:
            raise ValueError("penalty parameters must be positive")


def pack(T: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    return np.concatenate([T, alpha.reshape(-1)])


def unpack(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = z.size // 4
    return z[:n], z[n:].reshape(n, 3)


def objective_value(z: np.ndarray, mu: float) -> float:
    T, alpha = unpack(z)
    gram = alpha @ alpha.T
    off = gram - np.diag(np.diag(gram))
    # each unordered pair appears twice in |off|_F^2
    return 0.5 * float(T @ T) + 0.5 * mu * float(np.sum(off * off))


def eval_objective(z: np.ndarray, mu: float) -> tuple[float, np.ndarray]:
    """Objective value and its gradient.

    dJ/dT_i = T_i and dJ/dalpha_i = 2 mu sum_{j != i} (alpha_i . alpha_j) alpha_j.
    """
    T, alpha = unpack(z)
    gram = alpha @ alpha.T
    off = gram - np.diag(np.diag(gram))
    value = 0.5 * float(T @ T) + 0.5 * mu * float(np.sum(off * off))
    grad_alpha = 2.0 * mu * (off @ alpha)
    return value, np.concatenate([T, grad_alpha.reshape(-1)])


def constraint_values(z: np.ndarray, u_load: np.ndarray) -> np.ndarray:
    T, alpha = unpack(z)
    force = T @ alpha + u_load
    norms = np.einsum("ij,ij->i", alpha, alpha) - 1.0
    return np.concatenate([force, norms])


def constraints(z: np.ndarray, u_load: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Equality constraint values and Jacobian.

    Rows 0..2: force balance sum T_i alpha_i + u_L; rows 3..2+n: unit norms.
    The Jacobian's direction blocks are T_i * I3 (force rows) and 2 alpha_i^T
    (one norm row per cable), giving the block structure the QP exploits.
    """
    T, alpha = unpack(z)
    n = T.size
    c = constraint_values(z, u_load)
    jac = np.zeros((3 + n, 4 * n))
    jac[:3, :n] = alpha.T
    for i in range(n):
        col = n + 3 * i
        jac[:3, col : col + 3] = T[i] * np.eye(3)
        jac[3 + i, col : col + 3] = 2.0 * alpha[i]
    return c, jac


def objective_hessian(z: np.ndarray, mu: float) -> np.ndarray:
    """Exact objective Hessian (constraint curvature intentionally omitted).

    Tension block: identity.  Direction blocks:
      H[i][i] = 2 mu sum_{j != i} alpha_j alpha_j^T
      H[i][j] = 2 mu ((alpha_i . alpha_j) I + alpha_j alpha_i^T),  i != j.
    """
    T, alpha = unpack(z)
    n = T.size
    H = np.zeros((4 * n, 4 * n))
    H[:n, :n] = np.eye(n)
    gram = alpha @ alpha.T
    off = gram - np.diag(np.diag(gram))
    eye3 = np.eye(3)
    # blocks[i, :, j, :] viewed as the 3x3 block for the (alpha_i, alpha_j) pair
    blocks = off[:, None, :, None] * eye3[None, :, None, :] + np.einsum(
        "ja,ib->iajb", alpha, alpha
    )
    idx = np.arange(n)
    blocks[idx, :, idx, :] = (alpha.T @ alpha)[None, :, :] - np.einsum(
        "ia,ib->iab", alpha, alpha
    )
    H[n:, n:] = 2.0 * mu * blocks.reshape(3 * n, 3 * n)
    return H


def lagrangian_hessian(z: np.ndarray, mu: float, lam: np.ndarray) -> np.ndarray:
    """Hessian of the Lagrangian J - lam . c (bounds contribute no curvature).

    The force-balance rows are bilinear in (T_i, alpha_i) and the norm rows
    are quadratic in alpha_i, so on top of the objective Hessian:

      H[T_i, alpha_i] -= lam_force          (and symmetrically)
      H[alpha_i, alpha_i] -= 2 lam_norm_i I

    This curvature is what tells the quadratic model that rotating a
    direction cannot keep shedding tension forever; without it the model is
    unbounded along direction rotations whenever mu is small.
    """
    n = z.size // 4
    H = objective_hessian(z, mu)
    lam_force = lam[:3]
    for i in range(n):
        ri = n + 3 * i
        H[i, ri : ri + 3] -= lam_force
        H[ri : ri + 3, i] -= lam_force
        H[ri : ri + 3, ri : ri + 3] -= 2.0 * lam[3 + i] * np.eye(3)
    return H


def _orthonormal_basis(axis: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic right-handed pair orthogonal to a unit axis.

    Gram-Schmidt on e1 (e2 only when the axis is nearly e1): stable under
    small tilts of the axis, and a vertical axis yields exactly (e1, e2) so a
    cold start agrees with the plant's initial cone layout instead of
    commanding an azimuthal formation swap.
    """
    helper = np.array([1.0, 0.0, 0.0])
    if abs(float(axis[0])) > 0.9:
        helper = np.array([0.0, 1.0, 0.0])
    b1 = normalize(helper - float(helper @ axis) * axis)
    b2 = np.cross(axis, b1)
    return b1, b2


def initial_guess(
    u_load: np.ndarray, n: int, half_angle_deg: float = 35.0
) -> AllocSolution:
    """Cold-start cone: equal azimuths around -u_L at the given half-angle.

    Equal tensions balance the axial component exactly; for n >= 2 the lateral
    components cancel by symmetry so force balance holds in full.  For n = 1
    the half-angle collapses to zero and the guess is the exact solution.
    Raises DegenerateNorm when |u_L| is negligible.
    """
    axis = normalize(-np.asarray(u_load, dtype=float))
    demand = float(np.linalg.norm(u_load))
    if n == 1:
        return AllocSolution(
            T=np.array([demand]), alpha=axis[None, :], status=AllocStatus.FALLBACK
        )
    theta = math.radians(half_angle_deg)
    b1, b2 = _orthonormal_basis(axis)
    phis = 2.0 * math.pi * np.arange(n) / n
    alpha = (
        math.cos(theta) * axis[None, :]
        + math.sin(theta) * (np.cos(phis)[:, None] * b1 + np.sin(phis)[:, None] * b2)
    )
    alpha = alpha / np.linalg.norm(alpha, axis=1, keepdims=True)
    T = np.full(n, demand / (n * math.cos(theta)))
    return AllocSolution(T=T, alpha=alpha, status=AllocStatus.FALLBACK)
