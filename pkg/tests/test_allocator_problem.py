"""Objective/constraint values, gradients, and the cold-start cone."""

import math

import numpy as np
import pytest

from maats.allocator import (
    constraints,
    eval_objective,
    initial_guess,
    objective_hessian,
    pack,
)
from maats.allocator.problem import constraint_values, objective_value
from maats.mathcore import DegenerateNorm


def random_point(rng, n):
    T = rng.uniform(0.0, 5.0, size=n)
    alpha = rng.normal(size=(n, 3))
    alpha /= np.linalg.norm(alpha, axis=1, keepdims=True)
    return pack(T, alpha)


def central_diff(fn, z, h=1e-6):
    out = np.zeros_like(z)
    for k in range(z.size):
        zp, zm = z.copy(), z.copy()
        zp[k] += h
        zm[k] -= h
        out[k] = (fn(zp) - fn(zm)) / (2.0 * h)
    return out


class TestObjective:
    def test_parallel_pair_value_and_gradient(self):
        """T = (1,1), both directions e3, mu = 0.15: J = 1.15 and the
        direction gradient is 0.3 * e3 for each cable."""
        z = pack(np.array([1.0, 1.0]), np.tile([0.0, 0.0, 1.0], (2, 1)))
        value, grad = eval_objective(z, mu=0.15)
        assert value == pytest.approx(1.15, abs=1e-15)
        np.testing.assert_allclose(grad[:2], [1.0, 1.0])
        np.testing.assert_allclose(grad[2:5], [0.0, 0.0, 0.3])
        np.testing.assert_allclose(grad[5:8], [0.0, 0.0, 0.3])

    def test_orthogonal_directions_kill_penalty(self):
        alpha = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
        z = pack(np.array([2.0, 1.0, 0.5]), alpha)
        value, grad = eval_objective(z, mu=3.7)
        assert value == pytest.approx(0.5 * (4.0 + 1.0 + 0.25))
        np.testing.assert_allclose(grad[3:], 0.0, atol=1e-15)

    def test_gradient_matches_finite_differences(self):
        """Analytic gradient vs central differences on 100 random points."""
        rng = np.random.default_rng(42)
        for _ in range(100):
            n = int(rng.choice([2, 3, 4, 6]))
            mu = float(rng.uniform(0.0, 2.0))
            z = random_point(rng, n)
            _, grad = eval_objective(z, mu)
            fd = central_diff(lambda x: objective_value(x, mu), z)
            scale = max(1.0, float(np.max(np.abs(fd))))
            assert np.max(np.abs(grad - fd)) / scale < 1e-6


class TestConstraints:
    def test_single_cable_exact(self):
        u_load = np.array([1.0, -2.0, 2.0])
        norm = np.linalg.norm(u_load)
        z = pack(np.array([norm]), (-u_load / norm)[None, :])
        c, _ = constraints(z, u_load)
        np.testing.assert_allclose(c, 0.0, atol=1e-14)

    def test_scaled_direction_norm_row(self):
        u_load = np.array([0.0, 0.0, -3.0])
        z = pack(np.array([3.0]), np.array([[0.0, 0.0, 1.1]]))
        c, _ = constraints(z, u_load)
        assert c[3] == pytest.approx(1.1**2 - 1.0, abs=1e-15)

    def test_jacobian_matches_finite_differences(self):
        rng = np.random.default_rng(17)
        for _ in range(40):
            n = int(rng.choice([2, 3, 4, 6]))
            u_load = rng.normal(size=3) * 3.0
            z = random_point(rng, n)
            _, jac = constraints(z, u_load)
            for row in range(3 + n):
                fd = central_diff(lambda x: constraint_values(x, u_load)[row], z)
                scale = max(1.0, float(np.max(np.abs(fd))))
                assert np.max(np.abs(jac[row] - fd)) / scale < 1e-6

    def test_jacobian_block_structure(self):
        """Norm rows touch only their own direction block."""
        rng = np.random.default_rng(5)
        n = 4
        z = random_point(rng, n)
        _, jac = constraints(z, np.array([1.0, 0.0, -2.0]))
        for i in range(n):
            row = jac[3 + i].copy()
            row[n + 3 * i : n + 3 * i + 3] = 0.0
            np.testing.assert_allclose(row, 0.0, atol=1e-15)


class TestHessian:
    def test_matches_finite_difference_of_gradient(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            n = int(rng.choice([2, 3, 4]))
            mu = float(rng.uniform(0.1, 1.5))
            z = random_point(rng, n)
            H = objective_hessian(z, mu)
            np.testing.assert_allclose(H, H.T, atol=1e-12)
            h = 1e-6
            for k in range(z.size):
                zp, zm = z.copy(), z.copy()
                zp[k] += h
                zm[k] -= h
                col = (eval_objective(zp, mu)[1] - eval_objective(zm, mu)[1]) / (2 * h)
                assert np.max(np.abs(H[:, k] - col)) < 1e-5


class TestInitialGuess:
    def test_four_cable_cone(self):
        """|u_L| = 4 along -z: tensions 1/cos(35 deg), azimuths 90 deg apart."""
        sol = initial_guess(np.array([0.0, 0.0, -4.0]), 4)
        np.testing.assert_allclose(sol.T, 1.0 / math.cos(math.radians(35.0)))
        np.testing.assert_allclose(sol.alpha[:, 2], math.cos(math.radians(35.0)))
        np.testing.assert_allclose(sol.T @ sol.alpha, [0.0, 0.0, 4.0], atol=1e-12)
        gram = sol.alpha @ sol.alpha.T
        adjacent = [gram[0, 1], gram[1, 2], gram[2, 3], gram[3, 0]]
        np.testing.assert_allclose(adjacent, adjacent[0], atol=1e-12)

    def test_single_cable_reduces_to_exact(self):
        u_load = np.array([1.0, 1.0, -1.0])
        sol = initial_guess(u_load, 1)
        np.testing.assert_allclose(sol.T @ sol.alpha, -u_load, atol=1e-12)

    def test_equal_pairwise_angles_any_axis(self):
        rng = np.random.default_rng(2)
        u_load = rng.normal(size=3)
        sol = initial_guess(u_load, 3)
        gram = sol.alpha @ sol.alpha.T
        pairs = [gram[0, 1], gram[0, 2], gram[1, 2]]
        np.testing.assert_allclose(pairs, pairs[0], atol=1e-12)
        np.testing.assert_allclose(sol.T @ sol.alpha, -u_load, atol=1e-12)

    def test_degenerate_demand(self):
        with pytest.raises(DegenerateNorm):
            initial_guess(np.zeros(3), 4)
