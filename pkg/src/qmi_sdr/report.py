"""Result serialization and figure rendering.

Delimited outputs carry a comment-line metadata header (tool version, config
hash, seed) and are written with repr floats so reruns are byte-identical.
Figures are rendered with the Agg backend and stripped PNG metadata for the
same reason.
"""

from __future__ import annotations

import json
from importlib.metadata import PackageNotFoundError, version

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

try:
    TOOL_VERSION = version("qmi-sdr")
except PackageNotFoundError:  # running from a source tree
    TOOL_VERSION = "0+unknown"

_SAVEFIG_KW = dict(dpi=120, metadata={"Software": None})


def metadata_lines(cfg):
    return [
        f"# qmi-sdr {TOOL_VERSION}",
        f"# command: {cfg.command}",
        f"# config-hash: {cfg.digest()}",
        f"# seed: {cfg.seed}",
    ]


def _format(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_rows_csv(path, rows, columns, cfg):
    """Write dict rows as CSV with the metadata comment header."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for line in metadata_lines(cfg):
            fh.write(line + "\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_format(row.get(c)) for c in columns) + "\n")


def write_records_json(path, records, cfg):
    """Write per-trial records as a JSON document with a metadata block."""
    doc = {
        "tool": f"qmi-sdr {TOOL_VERSION}",
        "command": cfg.command,
        "config_hash": cfg.digest(),
        "seed": cfg.seed,
        "records": records,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def summarize(rows, group_keys, value_key):
    """Mean and standard error of `value_key` grouped by `group_keys`."""
    groups = {}
    for row in rows:
        if row.get(value_key) is None:
            continue
        key = tuple(row.get(k) for k in group_keys)
        groups.setdefault(key, []).append(float(row[value_key]))
    out = []
    for key in sorted(groups, key=str):
        vals = np.asarray(groups[key])
        se = float(vals.std(ddof=1) / np.sqrt(len(vals))) if len(vals) > 1 else 0.0
        rec = dict(zip(group_keys, key))
        rec.update(
            {
                "count": len(vals),
                f"mean_{value_key}": float(vals.mean()),
                f"se_{value_key}": se,
            }
        )
        out.append(rec)
    return out


# ---------------------------------------------------------------------------
# Figures
# ---------------------------------------------------------------------------

def _mean_by_theta(rows, key):
    by_theta = {}
    for row in rows:
        by_theta.setdefault(row["theta"], []).append(row[key])
    thetas = sorted(by_theta)
    return np.array(thetas), np.array([np.mean(by_theta[t]) for t in thetas])


def plot_illustrate(rows, path):
    """Mean estimated QMI and QMI derivative against the rotation angle."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.0, 3.4))
    thetas, qt = _mean_by_theta(rows, "qmi_tilde")
    _, ql = _mean_by_theta(rows, "qmi_lsqmi")
    ax1.plot(thetas, qt, label="direct derivative fit (by-product)")
    ax1.plot(thetas, ql, label="density-difference fit", ls="--")
    ax1.set_xlabel(r"$\theta$")
    ax1.set_ylabel("estimated QMI")
    ax1.legend(fontsize=8)
    _, dd = _mean_by_theta(rows, "dqmi_lsqmid")
    _, df = _mean_by_theta(rows, "dqmi_lsqmi_fd")
    ax2.plot(thetas, dd, label="direct estimate")
    ax2.plot(thetas, df, label="finite difference", ls="--")
    ax2.axhline(0.0, color="k", lw=0.6)
    ax2.set_xlabel(r"$\theta$")
    ax2.set_ylabel("estimated dQMI/d$\\theta$")
    ax2.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **_SAVEFIG_KW)
    plt.close(fig)


def plot_sdr(records, path):
    """Per-trial subspace errors (when the optimum is known) or scores."""
    ok = [r for r in records if "error" not in r]
    fig, ax = plt.subplots(figsize=(5.2, 3.4))
    trials = [r["trial"] for r in ok]
    if ok and ok[0].get("dr_error") is not None:
        ax.bar(trials, [r["dr_error"] for r in ok])
        ax.set_ylabel("dimension reduction error")
    else:
        ax.bar(trials, [r.get("score", 0.0) for r in ok])
        ax.set_ylabel("estimated QMI of solution")
    ax.set_xlabel("trial")
    fig.tight_layout()
    fig.savefig(path, **_SAVEFIG_KW)
    plt.close(fig)


def plot_bench(summary, path):
    """Mean RMSE per (dz, method) with standard-error bars."""
    fig, ax = plt.subplots(figsize=(5.8, 3.4))
    labels = [f"{r['method']}\ndz={r['dz']}" for r in summary]
    means = [r["mean_rmse"] for r in summary]
    errs = [r["se_rmse"] for r in summary]
    ax.bar(range(len(labels)), means, yerr=errs, capsize=3)
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, fontsize=7)
    ax.set_ylabel("test RMSE")
    fig.tight_layout()
    fig.savefig(path, **_SAVEFIG_KW)
    plt.close(fig)
