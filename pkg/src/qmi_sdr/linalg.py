"""Shared linear-algebra helpers for the regularized least-squares solves."""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .exceptions import SolveFailure

COND_LIMIT = 1e14
RESIDUAL_RTOL = 1e-8


def solve_regularized(a, rhs, reg):
    """Solve (A + reg I) x = rhs for symmetric PSD A.

    Uses a Cholesky factorization with iterative refinement; falls back to a
    pivoted symmetric solve when reg = 0 leaves the system semidefinite.
    Raises SolveFailure when the system is numerically singular
    (condition estimate above 1e14) or the residual cannot be driven below
    1e-8 relative to the right-hand side.
    """
    a = np.asarray(a, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    m = a + reg * np.eye(a.shape[0])

    def _residual(x):
        return np.linalg.norm(m @ x - rhs)

    rhs_norm = np.linalg.norm(rhs)
    if rhs_norm == 0.0:
        return np.zeros_like(rhs)

    factor = None
    try:
        factor = scipy.linalg.cho_factor(m, check_finite=False)
        x = scipy.linalg.cho_solve(factor, rhs, check_finite=False)
    except scipy.linalg.LinAlgError:
        _check_condition(m)
        x = scipy.linalg.solve(m, rhs, assume_a="sym", check_finite=False)

    for _ in range(3):
        if _residual(x) <= RESIDUAL_RTOL * rhs_norm:
            return x
        r = rhs - m @ x
        if factor is not None:
            x = x + scipy.linalg.cho_solve(factor, r, check_finite=False)
        else:
            x = x + scipy.linalg.solve(m, r, assume_a="sym", check_finite=False)

    if _residual(x) <= RESIDUAL_RTOL * rhs_norm:
        return x
    _check_condition(m)
    raise SolveFailure("iterative refinement failed to reach residual tolerance")


def _check_condition(m):
    eig = np.linalg.eigvalsh(m)
    lo, hi = abs(eig[0]), abs(eig[-1])
    if lo == 0.0 or hi / lo > COND_LIMIT:
        raise SolveFailure(
            f"system numerically singular (condition estimate {hi / max(lo, 1e-300):.3e})"
        )


def eig_solver(a):
    """Precompute the eigendecomposition of symmetric A.

    Returns a function solve(rhs, reg) evaluating (A + reg I)^-1 rhs cheaply
    for many (rhs, reg) pairs, as needed inside cross-validation loops.
    """
    vals, vecs = np.linalg.eigh(np.asarray(a, dtype=float))

    def solve(rhs, reg):
        denom = vals + reg
        if np.any(np.abs(denom) < 1e-300):
            raise SolveFailure("eigenvalue plus regularizer underflows")
        return vecs @ ((vecs.T @ rhs) / denom)

    return solve
