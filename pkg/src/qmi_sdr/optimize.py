"""Search over orthonormal projections maximizing estimated QMI.

Three drivers are provided:

* `optimize_fixed_point` — the per-entry fixed-point update derived from
  setting the estimated QMI gradient to zero, valid for any target dimension;
* `optimize_gradient_1d` — gradient ascent on the unit sphere with Armijo
  backtracking on the consistent QMI approximation (dz = 1 only);
* `optimize_gradient_fd` — gradient ascent for the baseline estimator whose
  only gradient is a finite difference of the fitted QMI value.

`multi_restart` runs a driver from several random orthonormal starts and
keeps the solution with the largest estimated QMI.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import lsqmi, lsqmid
from .basis import default_basis_count, gauss_block
from .data import Dataset, Projection, orthonormalize, random_projection
from .exceptions import AllRestartsFailed, SolveFailure, UnsupportedDimension
from .lsqmid import DEFAULT_LAMBDA_GRID, DEFAULT_SIGMA_GRID

ARMIJO_C1 = 1e-4
BACKTRACK_FACTOR = 0.5
MAX_BACKTRACKS = 30


@dataclass(frozen=True)
class OptimizerConfig:
    max_iters: int = 100
    tol: float = 1e-6
    orthonormalize_every: int = 5
    restarts: int = 10
    cv_refresh_every: int = 10
    seed: int = 0
    f3_floor: float = 1e-8

    def __post_init__(self):
        for name in ("max_iters", "orthonormalize_every", "restarts", "cv_refresh_every"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not self.f3_floor > 0:
            raise ValueError("f3_floor must be positive")


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    delta: float
    orthonormalized: bool
    score: float | None = None


@dataclass
class OptTrace:
    records: list[TraceRecord] = field(default_factory=list)
    converged: bool = False
    line_search_failed: bool = False

    def append(self, **kw):
        self.records.append(TraceRecord(**kw))

    @property
    def iterations(self):
        return len(self.records)


def _grids(cv_grids):
    if cv_grids is None:
        return DEFAULT_SIGMA_GRID, DEFAULT_LAMBDA_GRID
    return cv_grids


def fixed_point_terms(w, fit, x, z, y):
    """The three dz x dx matrices of the gradient decomposition.

    F1 - F2 - W * F3 equals the assembled QMI gradient entrywise; the
    fixed-point update is W <- (F1 - F2) / F3.
    """
    w = np.asarray(w, dtype=float)
    x = np.atleast_2d(np.asarray(x, dtype=float))
    n = x.shape[0]
    dz, dx = w.shape
    f1 = np.empty((dz, dx))
    f2 = np.empty((dz, dx))
    f3 = np.empty((dz, dx))
    x_sq = x * x
    for ell, (m, theta) in enumerate(zip(fit.models, fit.thetas)):
        ky = gauss_block(y, m.centers_v, m.sigma)
        bmat = gauss_block(z, m.centers_u, m.sigma) * (ky - ky.mean(axis=0)[None, :])
        scale = 1.0 / (n * m.sigma**2)
        g = bmat @ theta
        t = bmat @ (theta * m.centers_u[:, ell])
        f1[ell] = scale * (t @ x)
        f3[ell] = scale * (g @ x_sq)
        f2[ell] = scale * ((g * z[:, ell]) @ x) - w[ell] * f3[ell]
    return f1, f2, f3


def fixed_point_step(w, fit, x, z, y, f3_floor=1e-8):
    """One unnormalized fixed-point update of every entry of W.

    Entries whose F3 magnitude falls below the floor are left unchanged for
    this step rather than divided by a floored value.
    """
    w = np.asarray(w, dtype=float)
    f1, f2, f3 = fixed_point_terms(w, fit, x, z, y)
    ok = np.abs(f3) >= f3_floor
    new_w = w.copy()
    new_w[ok] = (f1[ok] - f2[ok]) / f3[ok]
    return new_w


def _lsqmid_fit_at(z, y, params, b, seed):
    sigmas = [p[0] for p in params]
    lambdas = [p[1] for p in params]
    return lsqmid.fit(z, y, sigmas, lambdas, b=b, seed=seed)


def optimize_fixed_point(ds: Dataset, dz, cfg: OptimizerConfig, cv_grids=None, w0=None, b=None):
    """Fixed-point iteration with periodic orthonormalization and CV refresh."""
    sigma_grid, lambda_grid = _grids(cv_grids)
    x, y = ds.x, ds.y
    w = (w0.w if isinstance(w0, Projection) else w0)
    if w is None:
        w = random_projection(dz, ds.dx, np.random.default_rng(cfg.seed)).w
    w = np.array(w, dtype=float)
    trace = OptTrace()
    params = None
    for it in range(1, cfg.max_iters + 1):
        z = x @ w.T
        if params is None or (it - 1) % cfg.cv_refresh_every == 0:
            params = lsqmid.cross_validate(
                z, y, sigma_grid, lambda_grid, seed=cfg.seed, b=b
            )
        fit = _lsqmid_fit_at(z, y, params, b, cfg.seed + it)
        w_new = fixed_point_step(w, fit, x, z, y, cfg.f3_floor)
        ortho = it % cfg.orthonormalize_every == 0
        if ortho:
            w_new = orthonormalize(w_new).w
        delta = float(np.linalg.norm(w_new - w))
        trace.append(iteration=it, delta=delta, orthonormalized=ortho)
        w = w_new
        if delta < cfg.tol:
            trace.converged = True
            break
    return orthonormalize(w), trace


def optimize_gradient_1d(ds: Dataset, cfg: OptimizerConfig, cv_grids=None, w0=None, b=None):
    """Gradient ascent on the unit sphere with a consistent Armijo line search.

    The search direction is the estimated QMI gradient projected to the
    sphere tangent space; the line search evaluates the QMI approximation
    with the fitted coefficients held frozen, then renormalizes W.
    """
    sigma_grid, lambda_grid = _grids(cv_grids)
    x, y = ds.x, ds.y
    w = (w0.w if isinstance(w0, Projection) else w0)
    if w is None:
        w = random_projection(1, ds.dx, np.random.default_rng(cfg.seed)).w
    w = np.array(w, dtype=float)
    if w.shape[0] != 1:
        raise UnsupportedDimension("gradient ascent with line search needs dz = 1")
    trace = OptTrace()
    params = None
    for it in range(1, cfg.max_iters + 1):
        z = x @ w.T
        if params is None or (it - 1) % cfg.cv_refresh_every == 0:
            params = lsqmid.cross_validate(
                z, y, sigma_grid, lambda_grid, seed=cfg.seed, b=b
            )
        fit = _lsqmid_fit_at(z, y, params, b, cfg.seed + it)
        j0 = lsqmid.qmi_tilde(fit, z, y)
        grad = lsqmid.qmi_gradient(fit, x, z, y)
        tangent = grad - (grad[0] @ w[0]) * w
        slope = float(np.sum(tangent**2))
        if slope == 0.0:
            trace.append(iteration=it, delta=0.0, orthonormalized=True)
            trace.converged = True
            break
        step = 1.0
        w_new = None
        for _ in range(MAX_BACKTRACKS + 1):
            trial = w + step * tangent
            trial /= np.linalg.norm(trial)
            if lsqmid.qmi_tilde(fit, x @ trial.T, y) >= j0 + ARMIJO_C1 * step * slope:
                w_new = trial
                break
            step *= BACKTRACK_FACTOR
        if w_new is None:
            trace.line_search_failed = True
            trace.append(iteration=it, delta=0.0, orthonormalized=True)
            break
        delta = float(np.linalg.norm(w_new - w))
        trace.append(iteration=it, delta=delta, orthonormalized=True)
        w = w_new
        if delta < cfg.tol:
            trace.converged = True
            break
    return orthonormalize(w), trace


def optimize_gradient_fd(ds: Dataset, dz, cfg: OptimizerConfig, cv_grids=None, w0=None, b=None, fd_step=1e-4):
    """Gradient ascent for the baseline estimator via finite differences.

    Direction is the finite-difference gradient projected to the Stiefel
    tangent space; the retraction re-orthonormalizes, and the Armijo check
    refits the coefficients at each trial point with sigma, lambda and the
    centers' sample indices held fixed.
    """
    sigma_grid, lambda_grid = _grids(cv_grids)
    x, y = ds.x, ds.y
    n = ds.n
    w = (w0.w if isinstance(w0, Projection) else w0)
    if w is None:
        w = random_projection(dz, ds.dx, np.random.default_rng(cfg.seed)).w
    w = np.array(w, dtype=float)
    trace = OptTrace()
    params = None
    for it in range(1, cfg.max_iters + 1):
        z = x @ w.T
        if params is None or (it - 1) % cfg.cv_refresh_every == 0:
            params = lsqmi.lsqmi_cv(z, y, sigma_grid, lambda_grid, seed=cfg.seed, b=b)
        sigma, lam = params
        seed_it = cfg.seed + it
        idx = np.random.default_rng(seed_it).choice(
            n, size=b or default_basis_count(n), replace=False
        )

        def value_at(w_mat):
            z_t = x @ w_mat.T
            fit = lsqmi.lsqmi_fit(
                z_t, y, sigma, lam, centers=(z_t[idx].copy(), y[idx].copy())
            )
            return lsqmi.lsqmi_value(fit)

        j0 = value_at(w)
        grad = lsqmi.lsqmi_w_gradient(x, y, w, sigma, lam, b=b, seed=seed_it, step=fd_step)
        sym = 0.5 * (grad @ w.T + w @ grad.T)
        tangent = grad - sym @ w
        slope = float(np.sum(tangent**2))
        if slope == 0.0:
            trace.append(iteration=it, delta=0.0, orthonormalized=True)
            trace.converged = True
            break
        step = 1.0
        w_new = None
        for _ in range(MAX_BACKTRACKS + 1):
            trial = orthonormalize(w + step * tangent).w
            if value_at(trial) >= j0 + ARMIJO_C1 * step * slope:
                w_new = trial
                break
            step *= BACKTRACK_FACTOR
        if w_new is None:
            trace.line_search_failed = True
            trace.append(iteration=it, delta=0.0, orthonormalized=True)
            break
        delta = float(np.linalg.norm(w_new - w))
        trace.append(iteration=it, delta=delta, orthonormalized=True)
        w = w_new
        if delta < cfg.tol:
            trace.converged = True
            break
    return orthonormalize(w), trace


METHODS = ("lsqmid-fp", "lsqmid-grad1d", "lsqmi-fd")


def _run_method(method, ds, dz, cfg, cv_grids, w0, b):
    if method == "lsqmid-fp":
        return optimize_fixed_point(ds, dz, cfg, cv_grids, w0=w0, b=b)
    if method == "lsqmid-grad1d":
        if dz != 1:
            raise UnsupportedDimension("lsqmid-grad1d requires dz = 1")
        return optimize_gradient_1d(ds, cfg, cv_grids, w0=w0, b=b)
    if method == "lsqmi-fd":
        return optimize_gradient_fd(ds, dz, cfg, cv_grids, w0=w0, b=b)
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


def selection_score(ds: Dataset, proj: Projection, cv_grids=None, seed=0, b=None):
    """Estimated QMI used to rank converged solutions.

    dz = 1 uses the consistent approximation from the derivative fit;
    larger dz falls back to the density-difference estimate, which is the
    only QMI value available there.
    """
    sigma_grid, lambda_grid = _grids(cv_grids)
    z = ds.x @ proj.w.T
    if proj.dz == 1:
        params = lsqmid.cross_validate(z, ds.y, sigma_grid, lambda_grid, seed=seed, b=b)
        fit = _lsqmid_fit_at(z, ds.y, params, b, seed)
        return lsqmid.qmi_tilde(fit, z, ds.y)
    sigma, lam = lsqmi.lsqmi_cv(z, ds.y, sigma_grid, lambda_grid, seed=seed, b=b)
    fit = lsqmi.lsqmi_fit(z, ds.y, sigma, lam, b=b, seed=seed)
    return lsqmi.lsqmi_value(fit)


@dataclass(frozen=True)
class RestartResult:
    restart: int
    seed: int
    projection: Projection | None
    score: float
    trace: OptTrace | None
    error: str | None = None


def multi_restart(ds: Dataset, dz, cfg: OptimizerConfig, cv_grids=None, method="lsqmid-fp", b=None, full_output=False):
    """Run the chosen driver from `cfg.restarts` random orthonormal starts.

    Per-restart seeds are cfg.seed + restart index, so serial and parallel
    execution give identical results.  Returns the argmax-scored projection;
    restarts that abort with a numerical failure are recorded and skipped.
    """
    results = []
    for r in range(cfg.restarts):
        seed_r = cfg.seed + r
        cfg_r = replace(cfg, seed=seed_r)
        w0 = random_projection(dz, ds.dx, np.random.default_rng(seed_r))
        try:
            proj, trace = _run_method(method, ds, dz, cfg_r, cv_grids, w0, b)
            score = selection_score(ds, proj, cv_grids, seed=seed_r, b=b)
        except SolveFailure as exc:
            results.append(
                RestartResult(r, seed_r, None, -math.inf, None, error=str(exc))
            )
            continue
        results.append(RestartResult(r, seed_r, proj, score, trace))
    survivors = [res for res in results if res.projection is not None]
    if not survivors:
        raise AllRestartsFailed("every restart aborted with a numerical failure")
    best = max(survivors, key=lambda res: res.score)
    if full_output:
        return best.projection, results
    return best.projection
