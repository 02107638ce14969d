"""Gaussian quantum Markov semigroups: stationary states and their entanglement."""

from .core import (
    CovarianceMatrix,
    DriftDiffusion,
    GaussianState,
    GklsGenerator,
    NoStationaryState,
    build_drift_diffusion,
    evolve_state,
    is_valid_covariance,
    stability_check,
    stationary_covariance,
)
from .entanglement import PartitionSpec, log_negativity, partial_trace, ppt_check
from .numkit import LinAlgFailure

__version__ = "0.1.0"

__all__ = [
    "CovarianceMatrix",
    "DriftDiffusion",
    "GaussianState",
    "GklsGenerator",
    "NoStationaryState",
    "build_drift_diffusion",
    "evolve_state",
    "is_valid_covariance",
    "stability_check",
    "stationary_covariance",
    "PartitionSpec",
    "log_negativity",
    "partial_trace",
    "ppt_check",
    "LinAlgFailure",
]
