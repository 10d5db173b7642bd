"""Simulation and analysis of Brownian motion run on inverse-subordinator
clocks, with stable, tempered stable, and gamma waiting-time families."""

__version__ = "0.1.0"

from .analytics import (AsymptoticRegime, MsdCurve, MsdKind, PowerLawFit,
                        covariance_analytic, fit_power_law,
                        gamma_msd_asymptote, match_gamma_to_tempered_stable,
                        memory_kernel, msd_analytic, msd_ensemble,
                        msd_time_avg, tail_power_integral)
from .distributions import (GammaSpec, RngStream, StableSpec,
                            TemperedStableSpec, levy_exponent, make_spec,
                            pdf_gamma, pdf_stable, pdf_tempered_stable,
                            sample_gamma_increment, sample_stable_increment,
                            sample_tempered_stable, unit_time_mean)
from .errors import (BudgetError, ConfigError, ConvergenceError,
                     CoverageError, DomainError, FitError, GridMismatchError,
                     SingularityError, SubdiffError)
from .special import (MlEvalReport, MlRegime, bessel_i, gamma_fn,
                      lower_incomplete_gamma, lower_incomplete_gamma_bessel,
                      mittag_leffler, ml_integral_kernel,
                      reciprocal_gamma_coeffs)
from .subordination import (SubordinatorPath, Trajectory,
                            inverse_subordinator, simulate_ensemble,
                            simulate_subordinator_path, simulate_trajectory)

__all__ = [
    "__version__",
    "AsymptoticRegime", "MsdCurve", "MsdKind", "PowerLawFit",
    "covariance_analytic", "fit_power_law", "gamma_msd_asymptote",
    "match_gamma_to_tempered_stable", "memory_kernel", "msd_analytic",
    "msd_ensemble", "msd_time_avg", "tail_power_integral",
    "GammaSpec", "RngStream", "StableSpec", "TemperedStableSpec",
    "levy_exponent", "make_spec", "pdf_gamma", "pdf_stable",
    "pdf_tempered_stable", "sample_gamma_increment",
    "sample_stable_increment", "sample_tempered_stable", "unit_time_mean",
    "BudgetError", "ConfigError", "ConvergenceError", "CoverageError",
    "DomainError", "FitError", "GridMismatchError", "SingularityError",
    "SubdiffError",
    "MlEvalReport", "MlRegime", "bessel_i", "gamma_fn",
    "lower_incomplete_gamma", "lower_incomplete_gamma_bessel",
    "mittag_leffler", "ml_integral_kernel", "reciprocal_gamma_coeffs",
    "SubordinatorPath", "Trajectory", "inverse_subordinator",
    "simulate_ensemble", "simulate_subordinator_path", "simulate_trajectory",
]
