"""Core data containers: paired samples, standardization, orthonormal projections.

All containers are immutable after construction and all operations are pure,
so they are safe to share across threads.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    DimensionMismatch,
    NonFiniteInput,
    RankDeficient,
    ZeroVarianceColumn,
)

ORTHO_TOL = 1e-8


def _as_matrix(a, name):
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-dimensional, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonFiniteInput(f"{name} contains non-finite entries")
    return a


@dataclass(frozen=True)
class Dataset:
    """Paired samples x (n × dx) and y (n × dy) with standardization state."""

    x: np.ndarray
    y: np.ndarray
    standardized: bool = False
    x_mean: np.ndarray | None = None
    x_std: np.ndarray | None = None
    y_mean: np.ndarray | None = None
    y_std: np.ndarray | None = None

    def __post_init__(self):
        x = _as_matrix(self.x, "x")
        y = _as_matrix(self.y, "y")
        if x.shape[0] != y.shape[0]:
            raise DimensionMismatch(
                f"x has {x.shape[0]} rows but y has {y.shape[0]}"
            )
        if x.shape[0] < 2:
            raise DimensionMismatch("need at least 2 samples")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def dx(self):
        return self.x.shape[1]

    @property
    def dy(self):
        return self.y.shape[1]


@dataclass(frozen=True)
class Projection:
    """Orthonormal matrix w (dz × dx) defining z = x wᵀ."""

    w: np.ndarray

    def __post_init__(self):
        w = _as_matrix(self.w, "w")
        dz, dx = w.shape
        if not 1 <= dz <= dx:
            raise DimensionMismatch(f"need 1 <= dz <= dx, got {dz} x {dx}")
        gram = w @ w.T
        if np.linalg.norm(gram - np.eye(dz)) > ORTHO_TOL:
            raise RankDeficient("rows of w are not orthonormal")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @property
    def dz(self):
        return self.w.shape[0]

    @property
    def dx(self):
        return self.w.shape[1]


def standardize(ds: Dataset) -> Dataset:
    """Shift and scale every column of x and y to zero mean, unit variance.

    Uses the n-1 denominator for the standard deviation.  Constant columns
    raise ZeroVarianceColumn so that column indices stay stable downstream.
    """
    if ds.standardized:
        raise ValueError("dataset is already standardized")

    def _stats(a, block):
        mean = a.mean(axis=0)
        std = a.std(axis=0, ddof=1)
        for j, s in enumerate(std):
            if s == 0.0:
                raise ZeroVarianceColumn(j, block)
        return mean, std

    x_mean, x_std = _stats(ds.x, "x")
    y_mean, y_std = _stats(ds.y, "y")
    return Dataset(
        x=(ds.x - x_mean) / x_std,
        y=(ds.y - y_mean) / y_std,
        standardized=True,
        x_mean=x_mean,
        x_std=x_std,
        y_mean=y_mean,
        y_std=y_std,
    )


def project(ds: Dataset, p: Projection) -> np.ndarray:
    """Return Z = X Wᵀ (n × dz)."""
    if p.dx != ds.dx:
        raise DimensionMismatch(f"projection expects dx={p.dx}, dataset has {ds.dx}")
    return ds.x @ p.w.T


def orthonormalize(w) -> Projection:
    """Map a raw full-row-rank matrix to the closest orthonormal-row matrix.

    Computes (W Wᵀ)^(-1/2) W through the SVD, which preserves the row space.
    """
    w = _as_matrix(np.array(w, dtype=float), "w")
    u, s, vt = np.linalg.svd(w, full_matrices=False)
    if s[-1] < 1e-12 * s[0]:
        raise RankDeficient(
            f"smallest singular value {s[-1]:.3e} below 1e-12 of largest {s[0]:.3e}"
        )
    return Projection(u @ vt)


def random_projection(dz, dx, rng) -> Projection:
    """Random orthonormal matrix: Gaussian entries then orthonormalization."""
    return orthonormalize(rng.standard_normal((dz, dx)))


# ---------------------------------------------------------------------------
# CSV interchange: header row x1..x{dx}, y1..y{dy}; comma separated, UTF-8.
# ---------------------------------------------------------------------------

def _expected_header(dx, dy):
    return [f"x{j + 1}" for j in range(dx)] + [f"y{j + 1}" for j in range(dy)]


def write_csv(ds: Dataset, path) -> None:
    """Write the dataset in the canonical x1..xdx,y1..ydy format."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_expected_header(ds.dx, ds.dy))
        for xi, yi in zip(ds.x, ds.y):
            writer.writerow([repr(float(v)) for v in xi] + [repr(float(v)) for v in yi])


def read_csv(path_or_file) -> Dataset:
    """Read a dataset from the canonical CSV format.

    The header must name columns x1..x{dx} followed by y1..y{dy}.
    """
    if isinstance(path_or_file, io.IOBase):
        fh = path_or_file
        close = False
    else:
        fh = open(path_or_file, "r", encoding="utf-8", newline="")
        close = True
    try:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DimensionMismatch("empty CSV file") from None
        header = [h.strip() for h in header]
        dx = sum(1 for h in header if h.startswith("x"))
        dy = len(header) - dx
        if dx < 1 or dy < 1 or header != _expected_header(dx, dy):
            raise DimensionMismatch(
                f"header must be x1..x{{dx}},y1..y{{dy}}, got {header}"
            )
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DimensionMismatch(
                    f"line {lineno}: expected {len(header)} fields, got {len(row)}"
                )
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise NonFiniteInput(f"line {lineno}: {exc}") from None
        data = np.asarray(rows, dtype=float)
        if data.shape[0] < 2:
            raise DimensionMismatch("need at least 2 data rows")
        return Dataset(x=data[:, :dx], y=data[:, dx:])
    finally:
        if close:
            fh.close()
