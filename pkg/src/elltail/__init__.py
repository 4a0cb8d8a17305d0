"""Conditional excess probabilities P(Y <= y | X > x) and conditional
quantiles for bivariate elliptical data with rapidly varying radial tails:
exact quadrature values, closed-form tail approximations, semi-parametric
estimators, marginal diagnostics, and a reproducible simulation harness.
"""

from .conditional import (
    DEFAULT_QUAD,
    QuadratureSettings,
    approx_joint,
    approx_theta,
    cond_excess_exact,
    cond_excess_with_trace,
    cond_quantile_exact,
    gumbel_ratio_error,
    marginal_quantile_x,
    marginal_survival_x,
)
from .diagnostics import (
    MarginalFitReport,
    TailShapeReport,
    fit_gpd_profile,
    fit_logistic,
    ks_test_mc,
)
from .errors import (
    ConfigError,
    DegenerateCorrelationError,
    DegenerateTailError,
    DomainError,
    ElltailError,
    InsufficientDataError,
    InvalidThresholdError,
    NumericFailure,
    UnsupportedFamilyError,
)
from .estimators import (
    TailFit,
    fit_all,
    fit_weibull_tail,
    kendall_rho,
    kendall_tau_a,
    psi_hat,
    quantile_hat,
    reconstruct_radii,
    theta_hat,
)
from .io import load_model_config, load_pairs_csv, write_pairs_csv
from .model import EllipticalModel, PairedSample, pairs_from_radial_angle, sample_pairs
from .radial import FAMILIES, RadialLaw, make_radial
from .seeding import derive_seed
from .simulate import SimConfig, SimSummary, load_sim_config, run_study, summarize_errors

__version__ = "0.1.0"
