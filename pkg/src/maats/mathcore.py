"""Minimal 3-vector / unit-quaternion toolkit shared by all modules.

Conventions, fixed once and used everywhere:

* 3-vectors are numpy arrays of shape ``(3,)`` (float64).
* Quaternions are numpy arrays ``[w, x, y, z]`` (scalar part first),
  Hamilton convention, right-handed; the conjugate is ``[w, -x, -y, -z]``.
* Unit vectors / quaternions are renormalized immediately after any
  integration update; drift beyond 1e-9 is treated as a bug upstream.
"""

from __future__ import annotations

import math

import numpy as np

E3 = np.array([0.0, 0.0, 1.0])

EPS_NORM = 1e-9

QUAT_IDENTITY = np.array([1.0, 0.0, 0.0, 0.0])


class DegenerateNorm(ValueError):
    """Direction extraction requested for a vector of negligible norm."""


def normalize(v: np.ndarray) -> np.ndarray:
    """Return v / ||v||, raising DegenerateNorm when ||v|| <= EPS_NORM.

    Callers that can hit the degenerate case (thrust extraction, cold-start
    cone axis) must handle the error with an explicit fallback instead of
    consuming a garbage direction.
    """
    n = math.sqrt(float(v @ v))
    if n <= EPS_NORM:
        raise DegenerateNorm(f"cannot normalize vector with norm {n:.3e}")
    return v / n


def quat_mul_raw(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product a (x) b without renormalization (kinematics use)."""
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ]
    )


def quat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product a (x) b of unit quaternions, renormalized."""
    q = quat_mul_raw(a, b)
    return q / math.sqrt(float(q @ q))


def quat_conj(q: np.ndarray) -> np.ndarray:
    """Conjugate [w, -x, -y, -z]; inverse rotation for unit quaternions."""
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_rotate(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Rotate v by the unit quaternion q (equals R(q) @ v)."""
    w = q[0]
    u = q[1:]
    # v' = v + 2 w (u x v) + 2 u x (u x v)
    uv = np.cross(u, v)
    return v + 2.0 * w * uv + 2.0 * np.cross(u, uv)


def quat_rotate_conj(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Rotate v by the conjugate of q (equals R(q).T @ v)."""
    w = q[0]
    u = -q[1:]
    uv = np.cross(u, v)
    return v + 2.0 * w * uv + 2.0 * np.cross(u, uv)


def quat_normalize(q: np.ndarray) -> np.ndarray:
    """Renormalize a near-unit quaternion (drift control after integration)."""
    return q / math.sqrt(float(q @ q))


def quat_from_axis_angle(axis: np.ndarray, angle: float) -> np.ndarray:
    """Unit quaternion for a rotation of `angle` radians about `axis`."""
    a = normalize(axis)
    h = 0.5 * angle
    s = math.sin(h)
    return np.array([math.cos(h), s * a[0], s * a[1], s * a[2]])


# Batched helpers for the plant: quats stacked as (n, 4), vectors as (n, 3).


def quat_rotate_e3_batch(q: np.ndarray) -> np.ndarray:
    """R(q_i) @ e3 for a stack of quaternions; returns (n, 3) thrust axes."""
    w, x, y, z = q[:, 0], q[:, 1], q[:, 2], q[:, 3]
    return np.stack(
        [2.0 * (x * z + w * y), 2.0 * (y * z - w * x), 1.0 - 2.0 * (x * x + y * y)],
        axis=1,
    )


def quat_derivative_batch(q: np.ndarray, omega_body: np.ndarray) -> np.ndarray:
    """dq/dt = 1/2 q (x) [0, omega] for stacked quaternions and body rates."""
    w, x, y, z = q[:, 0], q[:, 1], q[:, 2], q[:, 3]
    ox, oy, oz = omega_body[:, 0], omega_body[:, 1], omega_body[:, 2]
    return 0.5 * np.stack(
        [
            -x * ox - y * oy - z * oz,
            w * ox + y * oz - z * oy,
            w * oy - x * oz + z * ox,
            w * oz + x * oy - y * ox,
        ],
        axis=1,
    )


def normalize_rows(m: np.ndarray) -> np.ndarray:
    """Row-wise normalization for stacked direction vectors / quaternions."""
    return m / np.linalg.norm(m, axis=1, keepdims=True)
