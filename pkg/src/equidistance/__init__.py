"""Exact asymptotics and oracles for the probability that random vectors are equidistant."""

__version__ = "0.1.0"

from .covariance import AsymptoticPrediction, asymptotic_constant, c_constants, moments
from .distribution import DistributionSpec, DistributionSpecError, normalize
from .oracle import BudgetExceeded, brute_p_d, column_law, convergence_table, exact_p_d, mc_estimate

__all__ = [
    "AsymptoticPrediction",
    "BudgetExceeded",
    "DistributionSpec",
    "DistributionSpecError",
    "asymptotic_constant",
    "brute_p_d",
    "c_constants",
    "column_law",
    "convergence_table",
    "exact_p_d",
    "mc_estimate",
    "moments",
    "normalize",
]
