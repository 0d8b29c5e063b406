"""Run configuration: line-oriented `key = value` files with one section per
command, strict validation, and CLI-flag overrides."""

from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass

from .exceptions import ConfigError
from .lsqmid import DEFAULT_LAMBDA_GRID, DEFAULT_SIGMA_GRID
from .optimize import METHODS


def _parse_bool(v):
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _float_list(v):
    return tuple(float(t) for t in str(v).replace(",", " ").split())


def _int_list(v):
    return tuple(int(t) for t in str(v).replace(",", " ").split())


def _str_list(v):
    return tuple(t for t in str(v).replace(",", " ").split())


# key -> (parser, default); None default means required.
_COMMON = {
    "seed": (int, 0),
    "trials": (int, 10),
    "sigma_grid": (_float_list, tuple(DEFAULT_SIGMA_GRID)),
    "lambda_grid": (_float_list, tuple(DEFAULT_LAMBDA_GRID)),
    "basis_count": (int, 0),  # 0 means min(n, 200)
}

SCHEMAS = {
    "illustrate": {
        **_COMMON,
        "n": (int, 3000),
        "trials": (int, 20),
        "theta_points": (int, 33),
        "cv_at_zero": (_parse_bool, True),
        "fd_step": (float, 1e-4),
    },
    "sdr": {
        **_COMMON,
        "dataset": (str, None),
        "n": (int, 0),  # 0 means the dataset's conventional size
        "dz": (int, 1),
        "method": (str, "lsqmid-fp"),
        "restarts": (int, 10),
        "max_iters": (int, 100),
        "tol": (float, 1e-6),
        "orthonormalize_every": (int, 5),
        "cv_refresh_every": (int, 10),
    },
    "bench": {
        **_COMMON,
        "csv": (str, None),
        "n_train": (int, None),
        "dz_list": (_int_list, (1,)),
        "methods": (_str_list, ("lsqmid-fp",)),
        "baseline": (_parse_bool, True),
        "restarts": (int, 10),
        "max_iters": (int, 100),
        "tol": (float, 1e-6),
        "orthonormalize_every": (int, 5),
        "cv_refresh_every": (int, 10),
    },
}


@dataclass(frozen=True)
class RunConfig:
    command: str
    values: dict

    def __getattr__(self, name):
        try:
            return self.values[name]
        except KeyError:
            raise AttributeError(name) from None

    def canonical_text(self) -> str:
        lines = [f"[{self.command}]"]
        for key in sorted(self.values):
            lines.append(f"{key} = {self.values[key]!r}")
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()[:16]


def load_config(path, command, overrides=None) -> RunConfig:
    """Parse and validate the section for `command`, applying overrides."""
    if command not in SCHEMAS:
        raise ConfigError(f"unknown command {command!r}")
    schema = SCHEMAS[command]
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed config file: {exc}") from None

    raw = dict(parser[command]) if parser.has_section(command) else {}
    for key in raw:
        if key not in schema:
            raise ConfigError(f"unknown key {key!r} in section [{command}]")

    values = {}
    for key, (parse, default) in schema.items():
        if key in raw:
            try:
                values[key] = parse(raw[key])
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"invalid value for {key!r}: {exc}") from None
        elif default is None:
            raise ConfigError(f"missing required key {key!r} in section [{command}]")
        else:
            values[key] = default

    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in schema:
            raise ConfigError(f"override {key!r} not valid for command {command!r}")
        values[key] = value

    _validate(command, values)
    return RunConfig(command=command, values=values)


def _validate(command, values):
    if values["trials"] < 1:
        raise ConfigError("trials must be >= 1")
    if not values["sigma_grid"] or not values["lambda_grid"]:
        raise ConfigError("sigma_grid and lambda_grid must be non-empty")
    if any(s <= 0 for s in values["sigma_grid"]):
        raise ConfigError("sigma_grid entries must be positive")
    if any(l < 0 for l in values["lambda_grid"]):
        raise ConfigError("lambda_grid entries must be non-negative")
    if command == "illustrate":
        if values["n"] < 2:
            raise ConfigError("n must be >= 2")
        if values["theta_points"] < 1:
            raise ConfigError("theta_points must be >= 1")
        if values["fd_step"] <= 0:
            raise ConfigError("fd_step must be positive")
    if command == "sdr":
        if values["method"] not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}")
        if values["dz"] < 1:
            raise ConfigError("dz must be >= 1")
    if command == "bench":
        if values["n_train"] < 2:
            raise ConfigError("n_train must be >= 2")
        if any(d < 1 for d in values["dz_list"]):
            raise ConfigError("dz_list entries must be >= 1")
        for m in values["methods"]:
            if m not in METHODS:
                raise ConfigError(f"methods must be drawn from {METHODS}")
