"""Bayesian polynomial regression for choosing a genetic model per SNP."""

from .bayes import (
    NormalGammaPrior,
    SnpSuffStats,
    accumulate_stats,
    evaluate_all,
    fit_polynomial,
    select_model,
)
from .genetics import GeneticModel

__version__ = "0.1.0"

__all__ = [
    "GeneticModel",
    "NormalGammaPrior",
    "SnpSuffStats",
    "__version__",
    "accumulate_stats",
    "evaluate_all",
    "fit_polynomial",
    "select_model",
]
