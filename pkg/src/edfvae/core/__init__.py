"""Closed-form analysis: EDF families, numerical kernels, MLEs and activity statistics."""

from .activity import ActivityReport, ActivitySource, analytical_activity, empirical_activity, histogram_distance
from .closed_form import (
    AffineDecoder,
    MleSolution,
    RemainderBounds,
    VariationalOptima,
    activity_predict,
    approx_objective_general,
    dispersion_term,
    expected_remainder,
    kernel_point,
    kl_diag_gaussian,
    mle_fit,
    monte_carlo_elbo,
    objective_hat,
    optimal_variational,
    remainder_bounds,
    transform_data,
    variational_optima,
)
from .edf import (
    EdfConstants,
    EdfFamily,
    FamilyKind,
    conditional_variance,
    log_density,
    log_normalizer,
    mean_response,
    variance_response,
)
from .numerics import EigenDecomposition, gaussian_raw_moment, make_rng, sample_covariance, sym_eig

__all__ = [
    "ActivityReport",
    "ActivitySource",
    "AffineDecoder",
    "EdfConstants",
    "EdfFamily",
    "EigenDecomposition",
    "FamilyKind",
    "MleSolution",
    "RemainderBounds",
    "VariationalOptima",
    "activity_predict",
    "analytical_activity",
    "approx_objective_general",
    "conditional_variance",
    "dispersion_term",
    "empirical_activity",
    "expected_remainder",
    "gaussian_raw_moment",
    "histogram_distance",
    "kernel_point",
    "kl_diag_gaussian",
    "log_density",
    "log_normalizer",
    "make_rng",
    "mean_response",
    "mle_fit",
    "monte_carlo_elbo",
    "objective_hat",
    "optimal_variational",
    "remainder_bounds",
    "sample_covariance",
    "sym_eig",
    "transform_data",
    "variance_response",
]
