"""specwave: exact Gaussian laws and weak-error certificates for spectral
Galerkin truncations of an additive-noise stochastic wave equation.

The terminal-time law of every truncation is an explicit product of
bivariate Gaussians, so second moments, covariance operators, truncation
gaps, and a family of weak-error lower bounds are available in closed form.
The package pairs those closed forms with an exact coupled sampler, a
stochastic-integral quadrature oracle, coupled Monte Carlo estimators, and
log-log rate certification.
"""

__version__ = "0.1.0"

from .analytics import (
    BoundCertificate,
    ModeMoments,
    NumericFaultError,
    SeriesEstimate,
    apply_covariance_operator,
    bound_delta,
    bound_exp,
    bound_inf,
    bound_laplacian,
    certify_level,
    component_second_moment,
    exp_error_lower,
    gap_exact,
    inf_sinc,
    mode_moments,
    series_upper,
    tail_moment_series,
    tail_sum_lower,
    total_second_moment,
)
from .model import (
    ModelValidationError,
    SpectralModel,
    build_model,
    eta_to_model,
)
from .montecarlo import (
    Estimate,
    EstimatorConfig,
    WeakErrorReport,
    choose_reference_level,
    estimate_functional,
    estimate_weak_error_coupled,
    estimate_weak_error_independent,
    norm_truncation_bias_bound,
    phi,
    phi_truncation_bias_bound,
)
from .ratefit import RateReport, Sandwich, certify_sandwich, fit_loglog
from .sampler import (
    GalerkinSample,
    project,
    sample_exact,
    sample_exact_batch,
    sample_path_oracle,
    sample_path_oracle_batch,
)
from .streams import RandomStream

__all__ = [
    "BoundCertificate",
    "Estimate",
    "EstimatorConfig",
    "GalerkinSample",
    "ModeMoments",
    "ModelValidationError",
    "NumericFaultError",
    "RandomStream",
    "RateReport",
    "Sandwich",
    "SeriesEstimate",
    "SpectralModel",
    "WeakErrorReport",
    "apply_covariance_operator",
    "bound_delta",
    "bound_exp",
    "bound_inf",
    "bound_laplacian",
    "build_model",
    "certify_level",
    "certify_sandwich",
    "choose_reference_level",
    "component_second_moment",
    "estimate_functional",
    "estimate_weak_error_coupled",
    "estimate_weak_error_independent",
    "eta_to_model",
    "exp_error_lower",
    "fit_loglog",
    "gap_exact",
    "inf_sinc",
    "mode_moments",
    "norm_truncation_bias_bound",
    "phi",
    "phi_truncation_bias_bound",
    "project",
    "sample_exact",
    "sample_exact_batch",
    "sample_path_oracle",
    "sample_path_oracle_batch",
    "series_upper",
    "tail_moment_series",
    "tail_sum_lower",
    "total_second_moment",
]
