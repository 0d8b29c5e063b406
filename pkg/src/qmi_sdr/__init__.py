"""Supervised dimension reduction by direct estimation of the derivative of
quadratic mutual information, with the density-difference baseline, synthetic
generators and an evaluation harness."""

from .basis import BasisModel, select_centers
from .data import (
    Dataset,
    Projection,
    orthonormalize,
    project,
    random_projection,
    read_csv,
    standardize,
    write_csv,
)
from .evaluation import dr_error, krr_fit_cv, krr_predict, rmse
from .lsqmi import lsqmi_cv, lsqmi_fit, lsqmi_value, lsqmi_w_gradient
from .lsqmid import DerivativeFit, cross_validate, fit, qmi_gradient, qmi_tilde
from .optimize import (
    OptimizerConfig,
    multi_restart,
    optimize_fixed_point,
    optimize_gradient_1d,
)
from .synthetic import SyntheticSpec, augment_with_noise_features, generate

__all__ = [
    "BasisModel",
    "Dataset",
    "DerivativeFit",
    "OptimizerConfig",
    "Projection",
    "SyntheticSpec",
    "augment_with_noise_features",
    "cross_validate",
    "dr_error",
    "fit",
    "generate",
    "krr_fit_cv",
    "krr_predict",
    "lsqmi_cv",
    "lsqmi_fit",
    "lsqmi_value",
    "lsqmi_w_gradient",
    "multi_restart",
    "optimize_fixed_point",
    "optimize_gradient_1d",
    "orthonormalize",
    "project",
    "qmi_gradient",
    "qmi_tilde",
    "random_projection",
    "read_csv",
    "rmse",
    "select_centers",
    "standardize",
    "write_csv",
]
