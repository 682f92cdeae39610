"""Warm-started SQP driver for the tension-allocation NLP.

Each iteration linearizes the constraints, takes the exact objective Hessian
(Gauss-Newton style: constraint curvature omitted) regularized to be positive
definite on the constraint null space, solves the active-set QP, and accepts
steps through an l1 merit function with Armijo backtracking.  Directions are
reprojected onto the unit sphere after every accepted step.

Failure policy: a failed line search or an infeasible QP returns the starting
point (the caller's warm start, or the cold cone) tagged ``fallback`` so the
control loop never stalls.
"""

from __future__ import annotations

import time

import numpy as np

from .problem import (
    AllocProblem,
    AllocSolution,
    AllocStatus,
    SqpSettings,
    constraint_values,
    constraints,
    eval_objective,
    initial_guess,
    lagrangian_hessian,
    objective_value,
    pack,
    unpack,
)
from .qp import QpInfeasible, qp_subproblem

_ACTIVE_TOL = 1e-10


def _kkt_from_parts(
    grad: np.ndarray,
    c: np.ndarray,
    jac: np.ndarray,
    T: np.ndarray,
    lam: np.ndarray,
    nu: np.ndarray,
) -> float:
    n = T.size
    stat = grad - jac.T @ lam
    stat[:n] -= nu
    return max(
        float(np.max(np.abs(stat))),
        float(np.max(np.abs(c))),
        float(max(0.0, -np.min(T))),
        float(np.max(np.abs(nu * T))),
        float(max(0.0, -np.min(nu))),
    )


def kkt_residual(
    z: np.ndarray,
    lam: np.ndarray,
    nu: np.ndarray,
    u_load: np.ndarray,
    mu: float,
) -> float:
    """Max-norm of the first-order optimality conditions at (z, lam, nu).

    Stationarity grad J - A^T lam - E^T nu, primal feasibility (equalities and
    tension bounds), dual feasibility nu >= 0, and complementarity nu_i T_i.
    """
    T, _ = unpack(z)
    _, grad = eval_objective(z, mu)
    c, jac = constraints(z, u_load)
    return _kkt_from_parts(grad, c, jac, T, lam, nu)


def _estimate_multipliers(
    grad: np.ndarray, jac: np.ndarray, T: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Least-squares multipliers for the entry KKT check (warm starts hit the
    convergence test before any QP supplies multipliers)."""
    n = T.size
    m_eq = jac.shape[0]
    active = np.flatnonzero(T <= _ACTIVE_TOL)
    cols = [jac.T]
    if active.size:
        e = np.zeros((grad.size, active.size))
        e[active, np.arange(active.size)] = 1.0
        cols.append(e)
    M = np.hstack(cols)
    sol, *_ = np.linalg.lstsq(M, grad, rcond=None)
    lam = sol[:m_eq]
    nu = np.zeros(n)
    nu[active] = np.maximum(sol[m_eq:], 0.0)
    return lam, nu


def _regularized_hessian(H: np.ndarray, jac: np.ndarray, floor: float) -> np.ndarray:
    """Add tau*I so the reduced Hessian is safely positive definite.

    The orthonormal null basis Z of the constraint Jacobian gives
    Z^T (H + tau I) Z = Z^T H Z + tau I, so the smallest eigenvalue of the
    reduced Hessian yields the exact tau needed; the target keeps the reduced
    conditioning near 1e3 so the KKT solve stays well scaled even when the
    alignment weight (and with it all direction curvature) is zero.
    """
    _, sv, vt = np.linalg.svd(jac)
    rank = int(np.sum(sv > max(jac.shape) * np.finfo(float).eps * sv[0]))
    null_basis = vt[rank:].T
    if null_basis.shape[1] == 0:
        return H
    eigs = np.linalg.eigvalsh(null_basis.T @ H @ null_basis)
    target = max(floor, 1e-3 * max(1.0, float(eigs[-1])))
    tau = max(0.0, target - float(eigs[0]))
    return H + tau * np.eye(H.shape[0]) if tau > 0.0 else H


def _project(z: np.ndarray) -> np.ndarray:
    """Renormalize the direction rows (projection onto the unit sphere)."""
    T, alpha = unpack(z)
    return pack(T, alpha / np.linalg.norm(alpha, axis=1, keepdims=True))


def sqp_solve(problem: AllocProblem, settings: SqpSettings | None = None) -> AllocSolution:
    """Solve one allocation instance, warm starting from ``problem.prev``."""
    settings = settings or SqpSettings()
    t_start = time.perf_counter()
    n = problem.n
    u_load = problem.u_load
    mu = problem.mu
    scale = max(1.0, float(np.linalg.norm(u_load)))
    tol = settings.kkt_tol * scale

    if problem.prev is not None and problem.prev.T.size == n:
        T0 = np.maximum(problem.prev.T.copy(), 0.0)
        alpha0 = problem.prev.alpha / np.linalg.norm(
            problem.prev.alpha, axis=1, keepdims=True
        )
    else:
        guess = initial_guess(u_load, n, settings.cone_half_angle_deg)
        T0, alpha0 = guess.T, guess.alpha
    z0 = pack(T0, alpha0)

    def finish(z: np.ndarray, kkt: float, iters: int, status: AllocStatus) -> AllocSolution:
        T, alpha = unpack(z)
        return AllocSolution(
            T=np.maximum(T, 0.0),
            alpha=alpha / np.linalg.norm(alpha, axis=1, keepdims=True),
            kkt_residual=kkt,
            iterations=iters,
            status=status,
            solve_time=time.perf_counter() - t_start,
        )

    def fallback(iters: int) -> AllocSolution:
        T, _ = unpack(z0)
        lam_f, nu_f = _estimate_multipliers(
            eval_objective(z0, mu)[1], constraints(z0, u_load)[1], T
        )
        return finish(z0, kkt_residual(z0, lam_f, nu_f, u_load, mu), iters, AllocStatus.FALLBACK)

    z = z0.copy()
    lam = None
    nu = None
    penalty = settings.penalty_floor
    working: list[int] = []
    kkt = np.inf

    for it in range(settings.max_iter + 1):
        value, grad = eval_objective(z, mu)
        c, jac = constraints(z, u_load)
        T, _ = unpack(z)
        if lam is None:
            lam, nu = _estimate_multipliers(grad, jac, T)
        kkt = _kkt_from_parts(grad, c, jac, T, lam, nu)
        if kkt <= tol:
            return finish(z, kkt, it, AllocStatus.CONVERGED)
        if it == settings.max_iter:
            break

        H = _regularized_hessian(lagrangian_hessian(z, mu, lam), jac, settings.hessian_reg_floor)
        try:
            qp = qp_subproblem(H, grad, jac, c, lb=-T, working=working)
        except QpInfeasible:
            return fallback(it)
        d = qp.d
        if float(np.max(np.abs(d))) < settings.min_step:
            # QP says stationary but the KKT test disagrees: no usable step
            return fallback(it)
        lam, nu, working = qp.eq_multipliers, qp.bound_multipliers, qp.working_set

        mult_inf = max(
            float(np.max(np.abs(lam))),
            float(np.max(nu)) if nu.size else 0.0,
        )
        penalty = max(penalty, settings.penalty_margin * mult_inf, settings.penalty_floor)
        c_l1 = float(np.sum(np.abs(c)))
        merit0 = value + penalty * c_l1
        descent = float(grad @ d) - penalty * c_l1

        def merit_at(z_cand: np.ndarray) -> float:
            return objective_value(z_cand, mu) + penalty * float(
                np.sum(np.abs(constraint_values(z_cand, u_load)))
            )

        # Trial points are evaluated after sphere projection; on a rejected
        # full step, one minimum-norm second-order correction of the
        # constraint residual counters the Maratos effect (the sphere and the
        # bilinear force balance curve away from the linearization).
        z_next = None
        step = 1.0
        while step >= settings.min_step:
            z_try = _project(z + step * d)
            if merit_at(z_try) <= merit0 + settings.armijo_c * step * descent:
                z_next = z_try
                break
            if step == 1.0:
                correction, *_ = np.linalg.lstsq(
                    jac, -constraint_values(z_try, u_load), rcond=None
                )
                z_soc = _project(z + d + correction)
                if merit_at(z_soc) <= merit0 + settings.armijo_c * descent:
                    z_next = z_soc
                    break
            step *= settings.backtrack_factor
        if z_next is None:
            return fallback(it)
        z = z_next

    return finish(z, kkt, settings.max_iter, AllocStatus.MAX_ITER)
