"""Evaluation utilities: subspace error, Gaussian kernel ridge regression, RMSE."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.spatial.distance

from .data import Projection
from .exceptions import DimensionMismatch, LengthMismatch, SolveFailure
from .lsqmid import make_folds

DEFAULT_WIDTH_FACTORS = (0.25, 0.5, 1.0, 2.0, 4.0)
DEFAULT_RIDGE_GRID = (1e-6, 1e-4, 1e-2, 1.0)
RIDGE_FLOOR = 1e-10


def dr_error(w_opt: Projection, w_hat: Projection) -> float:
    """Frobenius norm of the difference of the two orthogonal projectors.

    Invariant to orthonormal re-mixing of the rows of either argument; zero
    iff the row spaces coincide.
    """
    if w_opt.dx != w_hat.dx:
        raise DimensionMismatch("projections live in different input spaces")
    if w_opt.dz != w_hat.dz:
        raise DimensionMismatch("projections have different target dimensions")
    a = w_opt.w.T @ w_opt.w
    b = w_hat.w.T @ w_hat.w
    return float(np.linalg.norm(a - b))


def rmse(y_true, y_pred) -> float:
    y_true = np.asarray(y_true, dtype=float).ravel()
    y_pred = np.asarray(y_pred, dtype=float).ravel()
    if y_true.shape != y_pred.shape or y_true.size < 1:
        raise LengthMismatch("y_true and y_pred must have equal nonzero length")
    return float(np.sqrt(np.mean((y_true - y_pred) ** 2)))


@dataclass(frozen=True)
class KrrModel:
    x_train: np.ndarray
    dual_coef: np.ndarray
    width: float
    ridge: float


def _rbf(a, b, width):
    d2 = scipy.spatial.distance.cdist(a, b, "sqeuclidean")
    return np.exp(-d2 / (2.0 * width**2))


def median_pairwise_distance(z) -> float:
    z = np.atleast_2d(np.asarray(z, dtype=float))
    d = scipy.spatial.distance.pdist(z)
    med = float(np.median(d)) if d.size else 1.0
    return med if med > 0 else 1.0


def krr_fit(z, y, width, ridge) -> KrrModel:
    z = np.atleast_2d(np.asarray(z, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    k = _rbf(z, z, width)
    m = k + max(ridge, RIDGE_FLOOR) * np.eye(z.shape[0])
    try:
        coef = scipy.linalg.solve(m, y, assume_a="pos")
    except scipy.linalg.LinAlgError as exc:
        raise SolveFailure(f"kernel system singular: {exc}") from None
    return KrrModel(x_train=z.copy(), dual_coef=coef, width=float(width), ridge=float(ridge))


def krr_predict(model: KrrModel, z) -> np.ndarray:
    z = np.atleast_2d(np.asarray(z, dtype=float))
    return _rbf(z, model.x_train, model.width) @ model.dual_coef


def krr_fit_cv(
    z,
    y,
    width_factors=DEFAULT_WIDTH_FACTORS,
    ridge_grid=DEFAULT_RIDGE_GRID,
    n_folds=5,
    seed=0,
) -> KrrModel:
    """Gaussian kernel ridge regression with K-fold grid search.

    Kernel widths are factors of the median pairwise distance of the
    training inputs.  Deterministic given the seed; ties break toward
    smaller width then smaller ridge.
    """
    z = np.atleast_2d(np.asarray(z, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    n = z.shape[0]
    med = median_pairwise_distance(z)
    widths = [f * med for f in width_factors]
    folds = make_folds(n, n_folds, seed)
    masks = []
    for f in folds:
        mask = np.zeros(n, dtype=bool)
        mask[f] = True
        masks.append(mask)

    best = None
    for width in widths:
        for ridge in ridge_grid:
            err = 0.0
            for mask in masks:
                model = krr_fit(z[~mask], y[~mask], width, ridge)
                resid = krr_predict(model, z[mask]) - y[mask]
                err += float(np.mean(resid**2))
            err /= len(masks)
            key = (err, width, ridge)
            if best is None or key < best:
                best = key
    return krr_fit(z, y, best[1], best[2])
