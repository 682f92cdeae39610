"""Equality-constrained QP with tension lower bounds, solved by active set.

Each subproblem is

    min_d  1/2 d^T H d + g^T d
    s.t.   A d = -b
           d_i >= lb_i   for the first len(lb) components (tension slots)

Bound rows are added to / dropped from a dense symmetric KKT saddle system
until no bound is violated and all bound multipliers are nonnegative.  At
team size 4 the base system is 23x23, small enough that a dense solve is
both the fastest and the simplest option.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class QpInfeasible(RuntimeError):
    """Linearized constraints are inconsistent or the active set cycled."""


@dataclass
class QpResult:
    d: np.ndarray
    eq_multipliers: np.ndarray
    bound_multipliers: np.ndarray  # full-length, zero off the working set
    working_set: list[int]


def _solve_saddle(
    H: np.ndarray,
    g: np.ndarray,
    A: np.ndarray,
    b: np.ndarray,
    lb: np.ndarray,
    working: list[int],
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n_var = H.shape[0]
    m_eq = A.shape[0]
    k = len(working)
    dim = n_var + m_eq + k
    K = np.zeros((dim, dim))
    K[:n_var, :n_var] = H
    K[:n_var, n_var : n_var + m_eq] = A.T
    K[n_var : n_var + m_eq, :n_var] = A
    for row, idx in enumerate(working):
        K[n_var + m_eq + row, idx] = 1.0
        K[idx, n_var + m_eq + row] = 1.0
    rhs = np.concatenate([-g, -b, lb[working] if k else np.empty(0)])
    try:
        sol = np.linalg.solve(K, rhs)
    except np.linalg.LinAlgError as exc:
        raise QpInfeasible(f"singular KKT system: {exc}") from exc
    if not np.all(np.isfinite(sol)):
        raise QpInfeasible("non-finite KKT solution")
    resid = float(np.max(np.abs(K @ sol - rhs)))
    if resid > 1e-7 * max(1.0, float(np.max(np.abs(rhs)))):
        raise QpInfeasible(f"ill-conditioned KKT system (residual {resid:.2e})")
    d = sol[:n_var]
    lam = -sol[n_var : n_var + m_eq]
    nu_w = -sol[n_var + m_eq :]
    return d, lam, nu_w


def qp_subproblem(
    H: np.ndarray,
    g: np.ndarray,
    A: np.ndarray,
    b: np.ndarray,
    lb: np.ndarray,
    working: list[int] | None = None,
    tol: float = 1e-10,
) -> QpResult:
    """Solve the bound-constrained QP; multipliers follow the convention
    H d + g = A^T lam + E_W^T nu with nu >= 0 at the solution."""
    n_bnd = lb.size
    W = sorted(set(working or []))
    max_sweeps = 3 * n_bnd + 10
    for _ in range(max_sweeps):
        d, lam, nu_w = _solve_saddle(H, g, A, b, lb, W)
        violation = lb[:n_bnd] - d[:n_bnd]
        violation[W] = -np.inf  # working bounds hold with equality
        worst = int(np.argmax(violation)) if n_bnd else 0
        if n_bnd and violation[worst] > tol:
            W = sorted(W + [worst])
            continue
        if W and np.min(nu_w) < -tol:
            W.pop(int(np.argmin(nu_w)))
            continue
        nu = np.zeros(n_bnd)
        for row, idx in enumerate(W):
            nu[idx] = nu_w[row]
        return QpResult(d=d, eq_multipliers=lam, bound_multipliers=nu, working_set=W)
    raise QpInfeasible("active set failed to settle")
