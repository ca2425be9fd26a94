"""Mutant-count distributions of fluctuation assays.

A wild-type population grows from ``N0`` to ``N`` cells; mutations found
clones that evolve as linear birth-death processes.  The package computes
the exact distribution of the number of mutants, its small-mutation-rate
limit, limit laws and tail asymptotics, and provides Monte Carlo samplers.
"""

__version__ = "0.1.0"

from .errors import (
    ConvergenceError,
    DomainError,
    FluctuateError,
    NumericError,
    UnsupportedRegimeError,
    ValidationError,
)
from .exact import Pmf, mean_B, pmf_B, pmf_oracle_cauchy, variance_B
from .limits import large_N_law, large_theta_law, stable_params, verify_limit_convergence
from .lpsm import boundary_theta, mode_V, moments_V, pmf_V, resistance_probability
from .model import LpsmParams, ModelParams, derive
from .specfun import hyp2f1

__all__ = [
    "__version__",
    "ConvergenceError",
    "DomainError",
    "FluctuateError",
    "NumericError",
    "UnsupportedRegimeError",
    "ValidationError",
    "LpsmParams",
    "ModelParams",
    "derive",
    "Pmf",
    "pmf_B",
    "pmf_oracle_cauchy",
    "mean_B",
    "variance_B",
    "pmf_V",
    "moments_V",
    "resistance_probability",
    "boundary_theta",
    "mode_V",
    "large_theta_law",
    "large_N_law",
    "stable_params",
    "verify_limit_convergence",
    "hyp2f1",
]
