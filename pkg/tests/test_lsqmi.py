"""Density-difference QMI baseline: moments, fit identities, CV, FD gradient."""

import numpy as np
import pytest

from qmi_sdr.basis import BasisModel, gram_d, phi_matrix, select_centers
from qmi_sdr.lsqmi import (
    compute_q_hat,
    lsqmi_cv,
    lsqmi_fit,
    lsqmi_value,
    lsqmi_value_variants,
    lsqmi_w_gradient,
)


class TestComputeQHat:
    def test_single_sample_gives_zero(self):
        m = BasisModel(np.array([[0.2]]), np.array([[0.1]]), 1.0, 0)
        q = compute_q_hat(m, np.array([[0.5]]), np.array([[0.3]]))
        np.testing.assert_allclose(q, 0.0, atol=1e-15)

    def test_matches_brute_force_double_loop(self):
        rng = np.random.default_rng(0)
        n = 7
        z = rng.normal(size=(n, 1))
        y = rng.normal(size=(n, 1))
        m = BasisModel(z[:3].copy(), y[:3].copy(), 0.9, 0)
        ref = np.zeros(3)
        for k in range(3):
            first = sum(
                phi_matrix(m, z[i : i + 1], y[i : i + 1])[0, k] for i in range(n)
            ) / n
            second = sum(
                phi_matrix(m, z[i : i + 1], y[j : j + 1])[0, k]
                for i in range(n)
                for j in range(n)
            ) / n**2
            ref[k] = first - second
        np.testing.assert_allclose(compute_q_hat(m, z, y), ref, atol=1e-13)


class TestFitAndValue:
    def test_normal_equations_residual(self):
        rng = np.random.default_rng(1)
        z = rng.normal(size=(80, 1))
        y = z + 0.4 * rng.normal(size=(80, 1))
        f = lsqmi_fit(z, y, 0.8, 0.01, b=30, seed=2)
        res = (f.d + f.lam * np.eye(f.model.b)) @ f.alpha - f.q_hat
        assert np.linalg.norm(res) <= 1e-8 * np.linalg.norm(f.q_hat)

    def test_unregularized_plug_in_identities(self):
        # at lambda = 0 the two raw plug-in forms coincide and the combined
        # value reduces to (1/2) q' D^-1 q
        rng = np.random.default_rng(2)
        z = rng.normal(size=(50, 1))
        y = z + 0.5 * rng.normal(size=(50, 1))
        f = lsqmi_fit(z, y, 1.0, 0.0, b=15, seed=3)
        va, vb = lsqmi_value_variants(f)
        assert va == pytest.approx(vb, abs=1e-8)
        ref = 0.5 * f.q_hat @ np.linalg.solve(f.d, f.q_hat)
        assert lsqmi_value(f) == pytest.approx(ref, abs=1e-8)

    def test_combined_value_formula(self):
        rng = np.random.default_rng(3)
        z = rng.normal(size=(40, 1))
        y = rng.normal(size=(40, 1))
        f = lsqmi_fit(z, y, 0.7, 0.05, b=12, seed=4)
        ref = f.alpha @ f.q_hat - 0.5 * f.alpha @ f.d @ f.alpha
        assert lsqmi_value(f) == pytest.approx(ref, abs=1e-14)

    def test_positive_under_strong_dependence(self):
        rng = np.random.default_rng(4)
        x = rng.normal(size=(600, 1))
        y = np.sin(2.0 * x) + 0.1 * rng.normal(size=(600, 1))
        sigma, lam = lsqmi_cv(x, y, seed=0)
        f = lsqmi_fit(x, y, sigma, lam, seed=0)
        assert lsqmi_value(f) > 0.01


class TestCv:
    def test_deterministic_and_grid_membership(self):
        rng = np.random.default_rng(5)
        z = rng.normal(size=(60, 1))
        y = z + 0.3 * rng.normal(size=(60, 1))
        a = lsqmi_cv(z, y, (0.5, 1.0), (0.01, 0.1), seed=1, b=20)
        b = lsqmi_cv(z, y, (0.5, 1.0), (0.01, 0.1), seed=1, b=20)
        assert a == b
        assert a[0] in (0.5, 1.0) and a[1] in (0.01, 0.1)

    def test_singleton_grid(self):
        rng = np.random.default_rng(6)
        z = rng.normal(size=(30, 1))
        y = rng.normal(size=(30, 1))
        assert lsqmi_cv(z, y, (0.9,), (0.3,), seed=0, b=10) == (0.9, 0.3)


class TestWGradient:
    def test_flat_objective_for_independent_noise(self):
        # y unrelated to x with heavy regularization: near-zero gradient
        rng = np.random.default_rng(7)
        x = rng.normal(size=(150, 3))
        y = rng.normal(size=(150, 1))
        w = np.array([[1.0, 0.0, 0.0]])
        g = lsqmi_w_gradient(x, y, w, sigma=1.0, lam=100.0, b=30, seed=1)
        assert np.all(np.abs(g) < 1e-3)

    def test_richardson_consistency(self):
        # halving the step should keep central differences consistent at O(h^2)
        rng = np.random.default_rng(8)
        x = rng.normal(size=(120, 2))
        y = (x[:, :1]) ** 2 + 0.2 * rng.normal(size=(120, 1))
        w = np.array([[np.cos(0.3), np.sin(0.3)]])
        g1 = lsqmi_w_gradient(x, y, w, sigma=0.8, lam=0.01, b=40, seed=2, step=1e-3)
        g2 = lsqmi_w_gradient(x, y, w, sigma=0.8, lam=0.01, b=40, seed=2, step=5e-4)
        np.testing.assert_allclose(g1, g2, rtol=1e-3, atol=1e-8)

    def test_sign_change_across_optimum_angle(self):
        # the rotation setup peaks at angle zero, so the angle derivative
        # flips sign from positive to negative across it
        rng = np.random.default_rng(9)
        n = 800
        x = rng.normal(size=(n, 2))
        y = (x[:, :1]) ** 2 + 0.15 * rng.normal(size=(n, 1))

        def angle_derivative(theta):
            w = np.array([[np.cos(theta), np.sin(theta)]])
            g = lsqmi_w_gradient(x, y, w, sigma=0.5, lam=0.01, b=100, seed=3)
            return g[0] @ np.array([-np.sin(theta), np.cos(theta)])

        assert angle_derivative(-0.4) > 0
        assert angle_derivative(0.4) < 0
