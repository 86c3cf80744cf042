"""Sparse drift estimation for high-dimensional Ornstein-Uhlenbeck processes."""

__version__ = "0.1.0"

from .bounds import (
    BoundsReport, ConeSpec, bounds_report, h0, in_cone, oracle_bounds,
    restricted_eigenvalue_empirical, t0, t_mart,
)
from .estimate import (
    DantzigConfig, EstimateResult, LassoConfig, Method, dantzig, dantzig_feasibility,
    lambda_plugin, lambda_rule, lasso, lasso_objective, mle, soft_threshold,
)
from .exceptions import (
    AssumptionHError, InfeasibleError, ParseError, SingularSystemError, SparseOUError,
)
from .experiments import ErrorReport, ExperimentConfig, run_fig1, run_fig2, support_metrics
from .model import (
    ErgodicConstants, HCertificate, ModelSpec, check_assumption_h, ergodic_constants,
    generate_sparse_stable, solve_lyapunov,
)
from .simulate import Path, Scheme, SimConfig, SufficientStats, simulate_path, sufficient_stats, transition_kernel

__all__ = [
    "AssumptionHError", "BoundsReport", "ConeSpec", "DantzigConfig", "ErgodicConstants",
    "ErrorReport", "EstimateResult", "ExperimentConfig", "HCertificate", "InfeasibleError",
    "LassoConfig", "Method", "ModelSpec", "ParseError", "Path", "Scheme", "SimConfig",
    "SingularSystemError", "SparseOUError", "SufficientStats", "bounds_report",
    "check_assumption_h", "dantzig", "dantzig_feasibility", "ergodic_constants",
    "generate_sparse_stable", "h0", "in_cone", "lambda_plugin", "lambda_rule", "lasso",
    "lasso_objective", "mle", "oracle_bounds", "restricted_eigenvalue_empirical", "run_fig1",
    "run_fig2", "simulate_path", "soft_threshold", "solve_lyapunov", "sufficient_stats",
    "support_metrics", "t0", "t_mart", "transition_kernel",
]
