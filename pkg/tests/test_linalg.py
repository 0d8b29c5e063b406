"""Regularized symmetric solves and the cached eigendecomposition solver."""

import numpy as np
import pytest

from qmi_sdr.exceptions import SolveFailure
from qmi_sdr.linalg import eig_solver, solve_regularized


def _spd(seed, n=8):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(n, n))
    return a @ a.T / n


class TestSolveRegularized:
    def test_matches_dense_inverse(self):
        a = _spd(0)
        rng = np.random.default_rng(1)
        rhs = rng.normal(size=8)
        x = solve_regularized(a, rhs, 0.1)
        ref = np.linalg.inv(a + 0.1 * np.eye(8)) @ rhs
        np.testing.assert_allclose(x, ref, atol=1e-10)

    def test_residual_is_small(self):
        for seed in range(5):
            a = _spd(seed)
            rhs = np.random.default_rng(50 + seed).normal(size=8)
            x = solve_regularized(a, rhs, 1e-3)
            res = np.linalg.norm((a + 1e-3 * np.eye(8)) @ x - rhs)
            assert res <= 1e-8 * np.linalg.norm(rhs)

    def test_zero_regularizer_on_spd_matrix(self):
        a = _spd(2)
        rhs = np.ones(8)
        x = solve_regularized(a, rhs, 0.0)
        np.testing.assert_allclose(a @ x, rhs, atol=1e-9)

    def test_indefinite_but_regularized(self):
        # semidefinite plus ridge is solvable even when a alone is singular
        a = np.zeros((4, 4))
        rhs = np.arange(4.0)
        x = solve_regularized(a, rhs, 2.0)
        np.testing.assert_allclose(x, rhs / 2.0)

    def test_singular_unregularized_system_raises(self):
        a = np.ones((4, 4))  # rank one, rhs outside the range
        with pytest.raises(SolveFailure):
            solve_regularized(a, np.array([1.0, -1.0, 0.0, 0.0]), 0.0)

    def test_zero_rhs_short_circuits(self):
        x = solve_regularized(np.zeros((3, 3)), np.zeros(3), 0.0)
        np.testing.assert_array_equal(x, np.zeros(3))


class TestEigSolver:
    def test_matches_direct_solve_across_regularizers(self):
        a = _spd(3)
        solve = eig_solver(a)
        rng = np.random.default_rng(4)
        rhs = rng.normal(size=8)
        for lam in (1e-4, 1e-2, 1.0):
            ref = solve_regularized(a, rhs, lam)
            np.testing.assert_allclose(solve(rhs, lam), ref, atol=1e-9)
