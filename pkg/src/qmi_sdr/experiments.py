"""Experiment drivers behind the CLI commands.

Each driver maps a validated RunConfig to a list of per-trial records.
Trials are independent with per-trial derived seeds, so they can run in
parallel processes with results ordered by trial index.
"""

from __future__ import annotations

import concurrent.futures

import numpy as np

from . import lsqmi, lsqmid, synthetic
from .basis import default_basis_count
from .config import RunConfig
from .data import Dataset, orthonormalize, read_csv, standardize
from .evaluation import dr_error, krr_fit_cv, krr_predict, rmse
from .exceptions import ConfigError, QmiSdrError
from .optimize import OptimizerConfig, multi_restart
from .synthetic import SyntheticSpec, rotation_matrix

TRIAL_SEED_STRIDE = 100003  # prime stride keeping restart seed blocks disjoint


def trial_seed(base_seed, trial):
    return base_seed + TRIAL_SEED_STRIDE * (trial + 1)


def _map_trials(worker, args_list, threads):
    if threads <= 1:
        return [worker(a) for a in args_list]
    with concurrent.futures.ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, args_list))


# ---------------------------------------------------------------------------
# illustrate: sweep the rotation angle, estimate QMI and its derivative
# ---------------------------------------------------------------------------

def theta_grid(points):
    return np.linspace(-np.pi / 2.0, np.pi / 2.0, points)


def _illustrate_trial(args):
    cfg, trial = args
    seed = trial_seed(cfg.seed, trial)
    n = cfg.n
    b = cfg.basis_count or default_basis_count(n)
    grids = (cfg.sigma_grid, cfg.lambda_grid)
    ds, _ = synthetic.generate(SyntheticSpec("rotation", n, seed))
    sds = standardize(ds)
    x, y = sds.x, sds.y
    idx = np.random.default_rng(seed).choice(n, size=b, replace=False)

    def centers_at(z):
        return z[idx].copy(), y[idx].copy()

    def cv_at(z):
        d_params = lsqmid.cross_validate(
            z, y, *grids, seed=seed, centers=centers_at(z)
        )[0]
        q_params = lsqmi.lsqmi_cv(z, y, *grids, seed=seed, centers=centers_at(z))
        return d_params, q_params

    if cfg.cv_at_zero:
        z0 = x @ rotation_matrix(0.0).T
        d_params, q_params = cv_at(z0)

    rows = []
    for theta in theta_grid(cfg.theta_points):
        w = rotation_matrix(theta)
        z = x @ w.T
        if not cfg.cv_at_zero:
            d_params, q_params = cv_at(z)
        fit = lsqmid.fit(z, y, d_params[0], d_params[1], centers=centers_at(z))
        grad = lsqmid.qmi_gradient(fit, x, z, y)
        dw_dtheta = np.array([-np.sin(theta), np.cos(theta)])
        # qmi_gradient differentiates twice the QMI functional that qmi_tilde
        # and lsqmi_value report, so halve it here to put both derivative
        # columns on the same dQMI/dtheta scale
        dqmi_lsqmid = float(0.5 * grad[0] @ dw_dtheta)
        qt = lsqmid.qmi_tilde(fit, z, y)

        def lsqmi_value_at(angle):
            w_t = rotation_matrix(angle)
            z_t = x @ w_t.T
            f = lsqmi.lsqmi_fit(
                z_t, y, q_params[0], q_params[1], centers=(z_t[idx].copy(), y[idx].copy())
            )
            return lsqmi.lsqmi_value(f)

        qmi_lsqmi = lsqmi_value_at(theta)
        step = cfg.fd_step
        dqmi_lsqmi_fd = (lsqmi_value_at(theta + step) - lsqmi_value_at(theta - step)) / (
            2.0 * step
        )
        rows.append(
            {
                "trial": trial,
                "theta": float(theta),
                "qmi_tilde": qt,
                "dqmi_lsqmid": dqmi_lsqmid,
                "qmi_lsqmi": qmi_lsqmi,
                "dqmi_lsqmi_fd": dqmi_lsqmi_fd,
            }
        )
    return rows


def run_illustrate(cfg: RunConfig, threads=1):
    per_trial = _map_trials(
        _illustrate_trial, [(cfg, t) for t in range(cfg.trials)], threads
    )
    return [row for rows in per_trial for row in rows]


# ---------------------------------------------------------------------------
# sdr: estimate the projection on synthetic or CSV data
# ---------------------------------------------------------------------------

def _load_sdr_dataset(cfg, seed):
    name = cfg.dataset
    if name in synthetic.DATASET_NAMES:
        n = cfg.n or synthetic.DEFAULT_N[name]
        return synthetic.generate(SyntheticSpec(name, n, seed))
    try:
        return read_csv(name), None
    except OSError as exc:
        raise ConfigError(f"cannot read dataset {name!r}: {exc}") from None


def _optimizer_config(cfg, seed):
    return OptimizerConfig(
        max_iters=cfg.max_iters,
        tol=cfg.tol,
        orthonormalize_every=cfg.orthonormalize_every,
        restarts=cfg.restarts,
        cv_refresh_every=cfg.cv_refresh_every,
        seed=seed,
    )


def raw_coordinate_projection(proj, x_std):
    """Map a projection fitted on standardized inputs back to raw coordinates."""
    return orthonormalize(proj.w / np.asarray(x_std)[None, :])


def _sdr_trial(args):
    cfg, trial = args
    seed = trial_seed(cfg.seed, trial)
    try:
        ds_raw, w_opt = _load_sdr_dataset(cfg, seed)
        sds = standardize(ds_raw)
        opt_cfg = _optimizer_config(cfg, seed)
        grids = (cfg.sigma_grid, cfg.lambda_grid)
        b = cfg.basis_count or None
        proj, details = multi_restart(
            sds, cfg.dz, opt_cfg, grids, method=cfg.method, b=b, full_output=True
        )
        record = {
            "trial": trial,
            "seed": seed,
            "w": [[float(v) for v in row] for row in proj.w],
            "iterations": sum(
                d.trace.iterations for d in details if d.trace is not None
            ),
            "restarts_failed": sum(1 for d in details if d.projection is None),
            "score": max(d.score for d in details if d.projection is not None),
        }
        if w_opt is not None:
            w_raw = raw_coordinate_projection(proj, sds.x_std)
            record["dr_error"] = dr_error(w_opt, w_raw)
        else:
            record["dr_error"] = None
        return record
    except ConfigError:
        raise
    except QmiSdrError as exc:
        return {"trial": trial, "seed": seed, "error": f"{type(exc).__name__}: {exc}"}


def run_sdr(cfg: RunConfig, threads=1):
    return _map_trials(_sdr_trial, [(cfg, t) for t in range(cfg.trials)], threads)


# ---------------------------------------------------------------------------
# bench: noise-augmented CSV benchmark with a downstream kernel regressor
# ---------------------------------------------------------------------------

def _standardize_with(stats, x, y):
    return (x - stats.x_mean) / stats.x_std, (y - stats.y_mean) / stats.y_std


def _bench_trial(args):
    cfg, trial = args
    seed = trial_seed(cfg.seed, trial)
    try:
        raw = read_csv(cfg.csv)
    except OSError as exc:
        raise ConfigError(f"cannot read dataset {cfg.csv!r}: {exc}") from None
    try:
        aug = synthetic.augment_with_noise_features(raw, seed)
        n = aug.n
        if cfg.n_train >= n:
            raise ConfigError(f"n_train={cfg.n_train} leaves no test samples (n={n})")
        perm = np.random.default_rng(seed).permutation(n)
        tr, te = perm[: cfg.n_train], perm[cfg.n_train :]
        train = Dataset(x=aug.x[tr], y=aug.y[tr])
        # Standardization statistics come from the training split only.
        strain = standardize(train)
        x_te, _ = _standardize_with(strain, aug.x[te], aug.y[te])
        y_te_raw = aug.y[te].ravel()
        grids = (cfg.sigma_grid, cfg.lambda_grid)
        b = cfg.basis_count or None
        opt_cfg = _optimizer_config(cfg, seed)

        def krr_rmse(z_tr, z_te):
            model = krr_fit_cv(z_tr, strain.y.ravel(), seed=seed)
            pred = krr_predict(model, z_te) * strain.y_std[0] + strain.y_mean[0]
            return rmse(y_te_raw, pred)

        rows = []
        for dz in cfg.dz_list:
            for method in cfg.methods:
                try:
                    proj = multi_restart(
                        strain, dz, opt_cfg, grids, method=method, b=b
                    )
                    value = krr_rmse(strain.x @ proj.w.T, x_te @ proj.w.T)
                    rows.append(
                        {"trial": trial, "dz": dz, "method": method, "rmse": value}
                    )
                except QmiSdrError as exc:
                    rows.append(
                        {
                            "trial": trial,
                            "dz": dz,
                            "method": method,
                            "rmse": None,
                            "error": f"{type(exc).__name__}: {exc}",
                        }
                    )
        if cfg.baseline:
            rows.append(
                {
                    "trial": trial,
                    "dz": strain.dx,
                    "method": "baseline-krr",
                    "rmse": krr_rmse(strain.x, x_te),
                }
            )
        return rows
    except ConfigError:
        raise
    except QmiSdrError as exc:
        return [{"trial": trial, "error": f"{type(exc).__name__}: {exc}"}]


def run_bench(cfg: RunConfig, threads=1):
    per_trial = _map_trials(_bench_trial, [(cfg, t) for t in range(cfg.trials)], threads)
    return [row for rows in per_trial for row in rows]
