"""Sparse + low-rank precision matrix estimation for latent-variable
Gaussian graphical models.

The package provides two estimators of the decomposition K = S + L of an
observed-marginal precision matrix (a constraint-based program solved by a
primal-dual method, and a regression-based program solved by alternating
block descent), a seeded simulator for latent GGMs, and a power/FDR/rank
benchmarking harness with SVG plotting.
"""

__version__ = "0.1.0"

from .dantzig import DantzigConfig, DantzigResult, fit_dantzig
from .evaluate import (
    ExperimentConfig,
    ExperimentRecord,
    aggregate,
    curve_comparison,
    default_experiment_config,
    power_fdr,
    run_experiment,
    select_rank_matched,
    support_offdiag,
)
from .linalg import (
    TOL,
    Tolerances,
    l1_offdiag,
    linf_entrywise,
    min_norm_solution,
    nuclear_norm,
    numeric_rank,
    soft_threshold,
    solve_spd,
    spectral_norm,
    svt,
    sym_eig,
)
from .regression import (
    FitResult,
    RegLrConfig,
    fit_regression,
    lambda_max,
    regression_coefficients,
    regression_decomposition,
)
from .simulate import (
    GeneratorConfig,
    GroundTruth,
    empirical_covariance,
    generate_full_precision,
    make_ground_truth,
    marginal_decomposition,
    sample_gaussian,
    select_hidden,
)

__all__ = [
    "DantzigConfig",
    "DantzigResult",
    "ExperimentConfig",
    "ExperimentRecord",
    "FitResult",
    "GeneratorConfig",
    "GroundTruth",
    "RegLrConfig",
    "TOL",
    "Tolerances",
    "aggregate",
    "curve_comparison",
    "default_experiment_config",
    "empirical_covariance",
    "fit_dantzig",
    "fit_regression",
    "generate_full_precision",
    "l1_offdiag",
    "lambda_max",
    "linf_entrywise",
    "make_ground_truth",
    "marginal_decomposition",
    "min_norm_solution",
    "nuclear_norm",
    "numeric_rank",
    "power_fdr",
    "regression_coefficients",
    "regression_decomposition",
    "run_experiment",
    "sample_gaussian",
    "select_hidden",
    "select_rank_matched",
    "soft_threshold",
    "solve_spd",
    "spectral_norm",
    "support_offdiag",
    "svt",
    "sym_eig",
]
