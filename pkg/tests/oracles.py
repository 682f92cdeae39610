"""Independent reference computations used to freeze expected test values.

Everything here is deliberately written without importing the package's
numerics: the single-pendulum integrator has its own RK4, the QP oracle is a
zooming grid search, and the cone oracle is a one-dimensional minimization.
"""

from __future__ import annotations

import math

import numpy as np


def pendulum_trajectory(
    theta0: float, omega0: float, omega_n_sq: float, t_end: float, dt: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Integrate theta_ddot = -omega_n_sq * sin(theta) with a scalar RK4.

    Returns (t, theta, theta_dot) sampled every dt.
    """
    steps = int(round(t_end / dt))
    t = np.linspace(0.0, steps * dt, steps + 1)
    theta = np.empty(steps + 1)
    omega = np.empty(steps + 1)
    theta[0], omega[0] = theta0, omega0

    def acc(th: float) -> float:
        return -omega_n_sq * math.sin(th)

    for k in range(steps):
        th, om = theta[k], omega[k]
        k1t, k1o = om, acc(th)
        k2t, k2o = om + 0.5 * dt * k1o, acc(th + 0.5 * dt * k1t)
        k3t, k3o = om + 0.5 * dt * k2o, acc(th + 0.5 * dt * k2t)
        k4t, k4o = om + dt * k3o, acc(th + dt * k3t)
        theta[k + 1] = th + dt / 6.0 * (k1t + 2 * k2t + 2 * k3t + k4t)
        omega[k + 1] = om + dt / 6.0 * (k1o + 2 * k2o + 2 * k3o + k4o)
    return t, theta, omega


def measured_period(t: np.ndarray, theta: np.ndarray) -> float:
    """Average full period from successive upward zero crossings of theta."""
    crossings = []
    for k in range(1, t.size):
        if theta[k - 1] < 0.0 <= theta[k]:
            # linear interpolation of the crossing time
            frac = -theta[k - 1] / (theta[k] - theta[k - 1])
            crossings.append(t[k - 1] + frac * (t[k] - t[k - 1]))
    if len(crossings) < 2:
        raise ValueError("not enough zero crossings to measure a period")
    diffs = np.diff(crossings)
    return float(np.mean(diffs))


def qp_value_by_zooming_grid(
    H: np.ndarray,
    g: np.ndarray,
    A: np.ndarray,
    b: np.ndarray,
    lb: np.ndarray,
    radius: float = 4.0,
    points: int = 9,
    zooms: int = 14,
) -> float:
    """Brute-force minimum of 1/2 d'Hd + g'd on {Ad = -b, d[:len(lb)] >= lb}.

    Parameterizes the affine feasible set through the constraint null space
    and searches a shrinking grid around the incumbent, filtering bound
    violations.  Accurate to roughly radius / 2.5**zooms in the point, which
    is plenty for objective-value comparisons at 1e-4.
    """
    n = H.shape[0]
    d_part, *_ = np.linalg.lstsq(A, -b, rcond=None)
    _, sv, vt = np.linalg.svd(A)
    rank = int(np.sum(sv > max(A.shape) * np.finfo(float).eps * sv[0]))
    Z = vt[rank:].T
    k = Z.shape[1]
    if k == 0:
        if np.any(d_part[: lb.size] < lb - 1e-9):
            raise ValueError("unique equality solution violates bounds")
        return float(0.5 * d_part @ H @ d_part + g @ d_part)

    center = np.zeros(k)
    r = radius
    best_val = np.inf
    axes = [np.linspace(-1.0, 1.0, points)] * k
    offsets = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, k)
    for _ in range(zooms):
        ys = center + r * offsets
        ds = d_part[None, :] + ys @ Z.T
        feasible = np.all(ds[:, : lb.size] >= lb[None, :] - 1e-12, axis=1)
        if not np.any(feasible):
            r *= 1.8  # widen until the feasible region is seen
            continue
        ds_f = ds[feasible]
        vals = 0.5 * np.einsum("ij,jk,ik->i", ds_f, H, ds_f) + ds_f @ g
        j = int(np.argmin(vals))
        if vals[j] < best_val:
            best_val = float(vals[j])
            center = ys[feasible][j]
        r /= 2.5
    return best_val


def symmetric_cone_objective(theta: float, demand: float, n: int, mu: float) -> float:
    """Allocation objective on the symmetric-cone slice for axial demand.

    Tensions demand/(n cos theta); directions at half-angle theta with
    azimuths 2*pi*i/n.
    """
    T = demand / (n * math.cos(theta))
    phis = 2.0 * math.pi * np.arange(n) / n
    dirs = np.stack(
        [
            math.sin(theta) * np.cos(phis),
            math.sin(theta) * np.sin(phis),
            math.cos(theta) * np.ones(n),
        ],
        axis=1,
    )
    gram = dirs @ dirs.T
    penalty = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            penalty += gram[i, j] ** 2
    return 0.5 * n * T * T + mu * penalty


def best_symmetric_cone_value(
    demand: float, n: int, mu: float, lo_deg: float = 0.01, hi_deg: float = 80.0
) -> float:
    """Scalar minimization of the cone objective by dense grid + refinement."""
    lo, hi = math.radians(lo_deg), math.radians(hi_deg)
    for _ in range(40):
        thetas = np.linspace(lo, hi, 61)
        vals = [symmetric_cone_objective(t, demand, n, mu) for t in thetas]
        j = int(np.argmin(vals))
        lo = thetas[max(j - 1, 0)]
        hi = thetas[min(j + 1, len(thetas) - 1)]
    theta = 0.5 * (lo + hi)
    return symmetric_cone_objective(theta, demand, n, mu)
