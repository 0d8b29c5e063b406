"""Containers, standardization, orthonormalization and CSV round trips."""

import io

import numpy as np
import pytest

from qmi_sdr.data import (
    Dataset,
    Projection,
    orthonormalize,
    project,
    random_projection,
    read_csv,
    standardize,
    write_csv,
)
from qmi_sdr.exceptions import (
    DimensionMismatch,
    NonFiniteInput,
    RankDeficient,
    ZeroVarianceColumn,
)


class TestDataset:
    def test_column_vectors_accepted(self):
        ds = Dataset(x=[1.0, 2.0, 3.0], y=[4.0, 5.0, 6.0])
        assert ds.x.shape == (3, 1)
        assert ds.y.shape == (3, 1)
        assert (ds.n, ds.dx, ds.dy) == (3, 1, 1)

    def test_row_count_mismatch(self):
        with pytest.raises(DimensionMismatch):
            Dataset(x=np.zeros((3, 2)), y=np.zeros((4, 1)))

    def test_single_sample_rejected(self):
        with pytest.raises(DimensionMismatch):
            Dataset(x=np.zeros((1, 2)), y=np.zeros((1, 1)))

    def test_non_finite_rejected(self):
        with pytest.raises(NonFiniteInput):
            Dataset(x=np.array([[1.0], [np.nan]]), y=np.zeros((2, 1)))

    def test_arrays_immutable(self):
        ds = Dataset(x=np.zeros((2, 1)), y=np.zeros((2, 1)))
        with pytest.raises(ValueError):
            ds.x[0, 0] = 1.0


class TestStandardize:
    def test_simple_column(self):
        ds = Dataset(x=[1.0, 2.0, 3.0], y=[1.0, 2.0, 3.0])
        out = standardize(ds)
        np.testing.assert_allclose(out.x.ravel(), [-1.0, 0.0, 1.0])
        np.testing.assert_allclose(out.y.ravel(), [-1.0, 0.0, 1.0])
        assert out.standardized
        np.testing.assert_allclose(out.x_mean, [2.0])
        np.testing.assert_allclose(out.x_std, [1.0])

    def test_uses_n_minus_one_denominator(self):
        ds = Dataset(x=[0.0, 2.0], y=[0.0, 1.0])
        out = standardize(ds)
        # std of [0, 2] with ddof=1 is sqrt(2)
        np.testing.assert_allclose(out.x_std, [np.sqrt(2.0)])

    def test_result_has_zero_mean_unit_variance(self):
        rng = np.random.default_rng(0)
        ds = Dataset(x=rng.normal(3.0, 2.5, size=(100, 4)), y=rng.normal(size=(100, 2)))
        out = standardize(ds)
        np.testing.assert_allclose(out.x.mean(axis=0), 0.0, atol=1e-12)
        np.testing.assert_allclose(out.x.std(axis=0, ddof=1), 1.0, atol=1e-12)

    def test_double_standardization_rejected(self):
        ds = standardize(Dataset(x=[1.0, 2.0, 3.0], y=[1.0, 2.0, 3.0]))
        with pytest.raises(ValueError):
            standardize(ds)

    def test_constant_column_raises_with_index(self):
        x = np.array([[1.0, 7.0], [2.0, 7.0], [3.0, 7.0]])
        with pytest.raises(ZeroVarianceColumn) as ei:
            standardize(Dataset(x=x, y=[1.0, 2.0, 3.0]))
        assert ei.value.index == 1
        assert ei.value.block == "x"


class TestProjection:
    def test_rejects_non_orthonormal(self):
        with pytest.raises(RankDeficient):
            Projection(np.array([[1.0, 1.0]]))

    def test_rejects_dz_larger_than_dx(self):
        with pytest.raises(DimensionMismatch):
            Projection(np.eye(3, 2))

    def test_accepts_rotation_rows(self):
        theta = 0.3
        p = Projection(np.array([[np.cos(theta), np.sin(theta)]]))
        assert p.dz == 1 and p.dx == 2


class TestProject:
    def test_projection_of_diagonal_direction(self):
        ds = Dataset(x=np.array([[1.0, 1.0], [2.0, 2.0]]), y=[0.0, 0.0])
        p = Projection(np.array([[1.0, 1.0]]) / np.sqrt(2.0))
        z = project(ds, p)
        np.testing.assert_allclose(z.ravel(), [np.sqrt(2.0), 2.0 * np.sqrt(2.0)])

    def test_dimension_check(self):
        ds = Dataset(x=np.zeros((2, 3)), y=np.zeros((2, 1)))
        with pytest.raises(DimensionMismatch):
            project(ds, Projection(np.array([[1.0, 0.0]])))


class TestOrthonormalize:
    def test_matches_svd_polar_factor(self):
        rng = np.random.default_rng(1)
        w = rng.normal(size=(2, 5))
        p = orthonormalize(w)
        # independent oracle: (W W')^(-1/2) W computed by eigendecomposition
        gram = w @ w.T
        vals, vecs = np.linalg.eigh(gram)
        inv_sqrt = vecs @ np.diag(vals**-0.5) @ vecs.T
        np.testing.assert_allclose(p.w, inv_sqrt @ w, atol=1e-12)

    def test_idempotent(self):
        rng = np.random.default_rng(2)
        p = orthonormalize(rng.normal(size=(2, 4)))
        p2 = orthonormalize(p.w)
        np.testing.assert_allclose(p.w, p2.w, atol=1e-12)

    def test_preserves_row_space(self):
        rng = np.random.default_rng(3)
        w = rng.normal(size=(2, 6))
        p = orthonormalize(w)
        # every original row must lie in the span of the orthonormal rows
        coeffs = w @ p.w.T
        np.testing.assert_allclose(coeffs @ p.w, w, atol=1e-10)

    def test_rank_deficient_raises(self):
        w = np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0]])
        with pytest.raises(RankDeficient):
            orthonormalize(w)

    def test_random_projection_is_orthonormal_and_seeded(self):
        p1 = random_projection(2, 5, np.random.default_rng(7))
        p2 = random_projection(2, 5, np.random.default_rng(7))
        np.testing.assert_array_equal(p1.w, p2.w)
        np.testing.assert_allclose(p1.w @ p1.w.T, np.eye(2), atol=1e-12)


class TestCsv:
    def test_round_trip_exact(self, tmp_path):
        rng = np.random.default_rng(4)
        ds = Dataset(x=rng.normal(size=(20, 3)), y=rng.normal(size=(20, 1)))
        path = tmp_path / "data.csv"
        write_csv(ds, path)
        back = read_csv(path)
        np.testing.assert_array_equal(back.x, ds.x)
        np.testing.assert_array_equal(back.y, ds.y)

    def test_header_names(self, tmp_path):
        ds = Dataset(x=np.zeros((2, 2)), y=np.zeros((2, 1)))
        path = tmp_path / "d.csv"
        write_csv(ds, path)
        header = path.read_text().splitlines()[0]
        assert header == "x1,x2,y1"

    def test_bad_header_rejected(self):
        buf = io.StringIO("a,b\n1,2\n3,4\n")
        with pytest.raises(DimensionMismatch):
            read_csv(buf)

    def test_non_numeric_field_rejected(self):
        buf = io.StringIO("x1,y1\n1,2\nfoo,4\n")
        with pytest.raises(NonFiniteInput):
            read_csv(buf)

    def test_empty_file_rejected(self):
        with pytest.raises(DimensionMismatch):
            read_csv(io.StringIO(""))
