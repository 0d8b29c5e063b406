"""Subspace search: fixed-point decomposition, drivers, restarts."""

import numpy as np
import pytest

from qmi_sdr import lsqmid
from qmi_sdr.data import Dataset, Projection, random_projection, standardize
from qmi_sdr.exceptions import AllRestartsFailed, UnsupportedDimension
from qmi_sdr.optimize import (
    METHODS,
    OptimizerConfig,
    fixed_point_step,
    fixed_point_terms,
    multi_restart,
    optimize_fixed_point,
    optimize_gradient_1d,
    selection_score,
)
from qmi_sdr.synthetic import SyntheticSpec, generate

GRIDS = ((0.25, 0.5, 1.0, 1.5, 2.0), (1e-3, 1e-2, 1e-1, 1.0))
FAST = OptimizerConfig(max_iters=30, restarts=2, seed=0)


def _rotation_setup(n=400, seed=0, dz=2):
    ds, _ = generate(SyntheticSpec("rotation", n, seed))
    sds = standardize(ds)
    rng = np.random.default_rng(seed + 1)
    w = random_projection(1, 2, rng).w if dz == 1 else np.eye(2)
    if dz == 2:
        w = random_projection(2, 2, rng).w
    z = sds.x @ w.T
    f = lsqmid.fit(z, sds.y, 0.7, 0.05, b=60, seed=seed)
    return w, f, sds.x, z, sds.y


class TestOptimizerConfig:
    def test_defaults_valid(self):
        cfg = OptimizerConfig()
        assert cfg.max_iters == 100 and cfg.restarts == 10

    def test_validation(self):
        with pytest.raises(ValueError):
            OptimizerConfig(max_iters=0)
        with pytest.raises(ValueError):
            OptimizerConfig(tol=0.0)
        with pytest.raises(ValueError):
            OptimizerConfig(restarts=0)


class TestFixedPointTerms:
    def test_decomposition_identity(self):
        for seed in range(5):
            for dz in (1, 2):
                w, f, x, z, y = _rotation_setup(seed=seed, dz=dz)
                if dz == 1:
                    f = lsqmid.fit(z, y, 0.7, 0.05, b=60, seed=seed)
                f1, f2, f3 = fixed_point_terms(w, f, x, z, y)
                grad = lsqmid.qmi_gradient(f, x, z, y)
                np.testing.assert_allclose(f1 - f2 - w * f3, grad, atol=1e-10)

    def test_step_solves_stationarity(self):
        # after an update, re-evaluating the terms at the old fit must give
        # entries satisfying w_new = (F1 - F2) / F3 by construction
        w, f, x, z, y = _rotation_setup(seed=3, dz=1)
        w_new = fixed_point_step(w, f, x, z, y)
        f1, f2, f3 = fixed_point_terms(w, f, x, z, y)
        ok = np.abs(f3) >= 1e-8
        np.testing.assert_allclose(w_new[ok], ((f1 - f2) / f3)[ok], atol=1e-12)

    def test_floor_freezes_entries(self):
        w, f, x, z, y = _rotation_setup(seed=4, dz=1)
        w_new = fixed_point_step(w, f, x, z, y, f3_floor=np.inf)
        np.testing.assert_array_equal(w_new, w)


class TestDrivers:
    def test_fixed_point_trace_bounded_and_orthonormal(self):
        ds, _ = generate(SyntheticSpec("rotation", 300, 1))
        sds = standardize(ds)
        cfg = OptimizerConfig(max_iters=8, restarts=1, seed=1)
        proj, trace = optimize_fixed_point(sds, 1, cfg, GRIDS, b=50)
        assert trace.iterations <= 8
        assert np.linalg.norm(proj.w @ proj.w.T - np.eye(1)) <= 1e-8

    def test_huge_tol_converges_first_iteration(self):
        ds, _ = generate(SyntheticSpec("rotation", 200, 2))
        sds = standardize(ds)
        cfg = OptimizerConfig(max_iters=50, tol=np.inf, restarts=1, seed=0)
        _, trace = optimize_fixed_point(sds, 1, cfg, GRIDS, b=40)
        assert trace.iterations == 1
        assert trace.converged

    def test_fixed_point_recovers_rotation_direction(self):
        ds, w_opt = generate(SyntheticSpec("rotation", 1000, 5))
        sds = standardize(ds)
        cfg = OptimizerConfig(max_iters=60, restarts=1, seed=2)
        proj, _ = optimize_fixed_point(sds, 1, cfg, GRIDS, b=100)
        # recovered direction should align with [1, 0] up to sign
        assert abs(proj.w[0, 0]) > 0.97

    def test_gradient_1d_improves_score_and_normalizes(self):
        ds, _ = generate(SyntheticSpec("rotation", 500, 3))
        sds = standardize(ds)
        cfg = OptimizerConfig(max_iters=20, restarts=1, seed=3)
        proj, trace = optimize_gradient_1d(sds, cfg, GRIDS, b=80)
        assert abs(np.linalg.norm(proj.w) - 1.0) <= 1e-10
        assert trace.iterations >= 1

    def test_gradient_1d_rejects_dz2_start(self):
        ds, _ = generate(SyntheticSpec("rotation", 100, 4))
        sds = standardize(ds)
        cfg = OptimizerConfig(max_iters=5, restarts=1, seed=0)
        with pytest.raises(UnsupportedDimension):
            optimize_gradient_1d(sds, cfg, GRIDS, w0=np.eye(2), b=30)


class TestSelectionScore:
    def test_dz1_uses_derivative_by_product(self):
        ds, w_opt = generate(SyntheticSpec("rotation", 400, 6))
        sds = standardize(ds)
        good = selection_score(sds, Projection(np.array([[1.0, 0.0]])), GRIDS, b=80)
        bad = selection_score(sds, Projection(np.array([[0.0, 1.0]])), GRIDS, b=80)
        assert good > bad

    def test_dz2_falls_back_to_density_difference(self):
        ds, _ = generate(SyntheticSpec("C", 150, 7))
        sds = standardize(ds)
        score = selection_score(sds, Projection(np.eye(2, 5)), GRIDS, b=50)
        assert np.isfinite(score)


class TestMultiRestart:
    def test_deterministic(self):
        ds, _ = generate(SyntheticSpec("rotation", 200, 8))
        sds = standardize(ds)
        cfg = OptimizerConfig(max_iters=10, restarts=2, seed=4)
        p1 = multi_restart(sds, 1, cfg, GRIDS, b=40)
        p2 = multi_restart(sds, 1, cfg, GRIDS, b=40)
        np.testing.assert_array_equal(p1.w, p2.w)

    def test_full_output_records_every_restart(self):
        ds, _ = generate(SyntheticSpec("rotation", 150, 9))
        sds = standardize(ds)
        cfg = OptimizerConfig(max_iters=5, restarts=3, seed=5)
        proj, results = multi_restart(sds, 1, cfg, GRIDS, b=30, full_output=True)
        assert len(results) == 3
        best = max(r.score for r in results if r.projection is not None)
        assert any(
            r.projection is not None
            and r.score == best
            and np.array_equal(r.projection.w, proj.w)
            for r in results
        )

    def test_unknown_method_rejected(self):
        ds, _ = generate(SyntheticSpec("rotation", 100, 10))
        sds = standardize(ds)
        with pytest.raises(ValueError):
            multi_restart(sds, 1, FAST, GRIDS, method="nope", b=30)

    def test_method_names_exported(self):
        assert METHODS == ("lsqmid-fp", "lsqmid-grad1d", "lsqmi-fd")
