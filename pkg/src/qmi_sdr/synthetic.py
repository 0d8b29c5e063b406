"""Seeded generators for the synthetic experiments.

Covers the 2-D rotation illustration, the four artificial regression
datasets (A-D) with their known optimal projections, and the gamma
noise-feature augmentation used by the benchmark protocol.  Gamma(a, b) is
shape a, scale b; Laplace(a, b) is location a, scale b; the second argument
of the Gaussian noise is a variance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset, Projection

DATASET_NAMES = ("rotation", "A", "B", "C", "D")

# Sample sizes used in the reported experiments, for convenience defaults.
DEFAULT_N = {"rotation": 3000, "A": 200, "B": 200, "C": 400, "D": 500}


@dataclass(frozen=True)
class SyntheticSpec:
    name: str
    n: int
    seed: int = 0

    def __post_init__(self):
        if self.name not in DATASET_NAMES:
            raise ValueError(f"unknown dataset {self.name!r}; expected {DATASET_NAMES}")
        if self.n < 2:
            raise ValueError("n must be at least 2")


def _sinc(t):
    # Unnormalized sinc: sin(t)/t with the removable singularity filled.
    return np.sinc(t / np.pi)


def generate(spec: SyntheticSpec):
    """Draw a dataset and the optimal projection for the named generator."""
    rng = np.random.default_rng(spec.seed)
    n = spec.n
    if spec.name == "rotation":
        x = rng.standard_normal((n, 2))
        eps = rng.normal(0.0, 0.15, size=n)
        y = x[:, 0] ** 2 + eps
        w_opt = np.array([[1.0, 0.0]])
    elif spec.name == "A":
        x = rng.standard_normal((n, 5))
        eps = rng.gamma(shape=0.25, scale=0.25, size=n)
        y = np.exp(-((x[:, 0] + x[:, 1]) ** 2) / 0.5) + eps
        w_opt = np.array([[1.0, 1.0, 0.0, 0.0, 0.0]]) / np.sqrt(2.0)
    elif spec.name == "B":
        x = rng.uniform(-1.0, 1.0, size=(n, 5))
        eps = rng.gamma(shape=0.25, scale=0.5, size=n)
        z = (x[:, 0] + 2.0 * x[:, 1]) / np.sqrt(5.0)
        y = z * np.sin(z) - eps
        w_opt = np.array([[1.0, 2.0, 0.0, 0.0, 0.0]]) / np.sqrt(5.0)
    elif spec.name == "C":
        x = rng.uniform(-1.0, 1.0, size=(n, 5))
        eps = rng.gamma(shape=0.25, scale=0.5, size=n)
        y = x[:, 0] * x[:, 1] / np.sqrt(2.0) - eps
        w_opt = np.eye(2, 5)
    else:  # D
        x = rng.laplace(loc=0.0, scale=0.5, size=(n, 5))
        eps = rng.normal(0.0, np.sqrt(0.25), size=n)
        y = _sinc(x[:, 0] * np.pi / 2.0) + x[:, 1] * eps
        w_opt = np.eye(2, 5)
    return Dataset(x=x, y=y.reshape(-1, 1)), Projection(w_opt)


def rotation_matrix(theta):
    """The 1 x 2 projection [cos(theta), sin(theta)] of the illustration."""
    return np.array([[np.cos(theta), np.sin(theta)]])


def augment_with_noise_features(ds: Dataset, seed):
    """Append 5 Gamma(1, 2) noise columns to the raw (pre-standardized) input."""
    if ds.standardized:
        raise ValueError("augment before standardization")
    noise = np.random.default_rng(seed).gamma(shape=1.0, scale=2.0, size=(ds.n, 5))
    return Dataset(x=np.hstack([ds.x, noise]), y=ds.y)
