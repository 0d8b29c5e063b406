"""Command-line entry point: `qmi-sdr illustrate|sdr|bench --config <path>`.

Exit codes: 0 success, 1 numerical failure in all restarts/trials,
2 configuration or I/O error.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from . import experiments, report
from .config import load_config
from .exceptions import ConfigError, QmiSdrError

ILLUSTRATE_COLUMNS = (
    "trial",
    "theta",
    "qmi_tilde",
    "dqmi_lsqmid",
    "qmi_lsqmi",
    "dqmi_lsqmi_fd",
)


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="qmi-sdr",
        description="Supervised dimension reduction via direct QMI-derivative estimation",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("illustrate", "sweep the rotation angle and record QMI derivative estimates"),
        ("sdr", "estimate a projection on synthetic or CSV data"),
        ("bench", "noise-augmented benchmark with a downstream kernel regressor"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to the run config file")
        p.add_argument("--seed", type=int, default=None, help="override the base seed")
        p.add_argument("--out", default=".", help="output directory (default: cwd)")
        p.add_argument("--trials", type=int, default=None, help="override trial count")
        p.add_argument("--threads", type=int, default=1, help="parallel trial workers")
    return parser


def _prepare(args):
    cfg = load_config(args.config, args.command, {"seed": args.seed, "trials": args.trials})
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory: {exc}") from None
    return cfg, out


def _cmd_illustrate(args):
    cfg, out = _prepare(args)
    rows = experiments.run_illustrate(cfg, threads=args.threads)
    report.write_rows_csv(out / "illustrate.csv", rows, ILLUSTRATE_COLUMNS, cfg)
    report.plot_illustrate(rows, out / "illustrate.png")
    return 0


def _cmd_sdr(args):
    cfg, out = _prepare(args)
    records = experiments.run_sdr(cfg, threads=args.threads)
    report.write_records_json(out / "trials.json", records, cfg)
    summary = report.summarize(
        [r for r in records if "error" not in r], (), "dr_error"
    )
    for rec in summary:
        rec["method"] = cfg.method
        rec["dataset"] = cfg.dataset
        rec["dz"] = cfg.dz
    report.write_rows_csv(
        out / "summary.csv",
        summary,
        ("dataset", "method", "dz", "count", "mean_dr_error", "se_dr_error"),
        cfg,
    )
    report.plot_sdr(records, out / "sdr.png")
    if all("error" in r for r in records):
        return 1
    return 0


def _cmd_bench(args):
    cfg, out = _prepare(args)
    rows = experiments.run_bench(cfg, threads=args.threads)
    report.write_rows_csv(
        out / "bench.csv", rows, ("trial", "dz", "method", "rmse", "error"), cfg
    )
    summary = report.summarize(
        [r for r in rows if r.get("rmse") is not None], ("method", "dz"), "rmse"
    )
    report.write_rows_csv(
        out / "summary.csv",
        summary,
        ("method", "dz", "count", "mean_rmse", "se_rmse"),
        cfg,
    )
    report.plot_bench(summary, out / "bench.png")
    if not any(r.get("rmse") is not None for r in rows):
        return 1
    return 0


_COMMANDS = {"illustrate": _cmd_illustrate, "sdr": _cmd_sdr, "bench": _cmd_bench}


def main(argv=None):
    args = _build_parser().parse_args(argv)
    started = time.monotonic()
    try:
        code = _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except QmiSdrError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1
    # Timing goes to stderr only; result files stay byte-deterministic.
    print(f"{args.command} finished in {time.monotonic() - started:.1f}s", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
