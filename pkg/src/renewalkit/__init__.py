"""renewalkit: measure-valued solutions of the conservative renewal
equation.

The package evolves finite signed measures under age-structured renewal
dynamics (ages grow at unit speed, reset to zero at an age-dependent
rate), builds the dual action on bounded test functions by fixed-point
iteration of the Duhamel map, and certifies exponential relaxation to
the invariant measure in total variation through Doeblin minorization
constants.
"""

__version__ = "0.1.0"

from .measures import (SignedMeasure, TestFunction, constant_function,
                       exp_profile, smooth_bump, truncation_family)
from .hazard import HazardRate, ramp_rate
from .dual import (AgeProfile, DualWindow, apply_generator, evolve_dual,
                   generator_consistency, picard_window)
from .forward import (BoundaryFlux, ForwardOrbit, duality_gap, evolve_measure,
                      meassol_residual, solve_flux, solve_orbit)
from .oracle import PathEnsemble, compare_cdf, dkw_band, simulate
from .ergodicity import (DoeblinCertificate, best_certificate, certificate,
                         stationary, tv_decay_experiment, verify_minorization)
from .exceptions import (ConfigError, ContractError, ConvergenceError,
                         DomainError, InvariantViolation, RenewalError)

__all__ = [
    "SignedMeasure", "TestFunction", "constant_function", "exp_profile",
    "smooth_bump", "truncation_family",
    "HazardRate", "ramp_rate",
    "AgeProfile", "DualWindow", "apply_generator", "evolve_dual",
    "generator_consistency", "picard_window",
    "BoundaryFlux", "ForwardOrbit", "duality_gap", "evolve_measure",
    "meassol_residual", "solve_flux", "solve_orbit",
    "PathEnsemble", "compare_cdf", "dkw_band", "simulate",
    "DoeblinCertificate", "best_certificate", "certificate", "stationary",
    "tv_decay_experiment", "verify_minorization",
    "ConfigError", "ContractError", "ConvergenceError", "DomainError",
    "InvariantViolation", "RenewalError",
]
