"""Kernel estimation of the location and size of the mode of a density.

Semirecursive (per-arrival bandwidth) and nonrecursive kernel density
estimators, their maximisers, the limit covariance of the (location, size)
pair, chi-square confidence ellipsoids and a Monte Carlo coverage harness.
"""
from .bandwidth import (
    BandwidthSchedule,
    Regime,
    RegimeClassification,
    SlowFactor,
    classify_regime,
    classify_schedules,
    parse_schedule,
    validate_a3,
)
from .density import NONRECURSIVE, SEMIRECURSIVE, RecursiveKernelDensity
from .estimator import KernelModeEstimator
from .inference import (
    AsymptoticModel,
    EllipsoidCoefficients,
    asymptotic_covariance,
    bias_vector,
    chi2_quantile_df2,
    ellipsoid_coefficients,
    ellipsoid_contains,
    estimate_second_derivative,
)
from .kernels import KernelConstants, KernelSpec, compute_constants, gaussian_kernel
from .mode import ModeEstimate, SearchConfig, estimate_size, locate_mode, sample_argmax_mode

__version__ = "0.1.0"

__all__ = [
    "BandwidthSchedule",
    "Regime",
    "RegimeClassification",
    "SlowFactor",
    "classify_regime",
    "classify_schedules",
    "parse_schedule",
    "validate_a3",
    "NONRECURSIVE",
    "SEMIRECURSIVE",
    "RecursiveKernelDensity",
    "KernelModeEstimator",
    "AsymptoticModel",
    "EllipsoidCoefficients",
    "asymptotic_covariance",
    "bias_vector",
    "chi2_quantile_df2",
    "ellipsoid_coefficients",
    "ellipsoid_contains",
    "estimate_second_derivative",
    "KernelConstants",
    "KernelSpec",
    "compute_constants",
    "gaussian_kernel",
    "ModeEstimate",
    "SearchConfig",
    "estimate_size",
    "locate_mode",
    "sample_argmax_mode",
]
