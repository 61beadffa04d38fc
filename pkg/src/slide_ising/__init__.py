"""Sparse Ising model reconstruction by l0-constrained pseudo-likelihood splicing."""

__version__ = "0.1.0"

from .model import CouplingMatrix, Dataset, ExactDistribution, FamilyParams, conditional_prob, exact_distribution
from .sampling import gibbs_sample, sample_exact
from .generators import BenchmarkModel, Pattern, generate_pbsl, generate_rrg
from .solver import SlideConfig, fit, reconstruct
from .metrics import exact_recovery, mse, structure_metrics

__all__ = [
    "BenchmarkModel", "CouplingMatrix", "Dataset", "ExactDistribution", "FamilyParams", "Pattern",
    "SlideConfig", "conditional_prob", "exact_distribution", "exact_recovery", "fit", "generate_pbsl",
    "generate_rrg", "gibbs_sample", "mse", "reconstruct", "sample_exact", "structure_metrics",
]
