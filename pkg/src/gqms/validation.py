"""Input checks shared by the numerical code and the estimator wrappers.

Each ``check_*`` helper returns a fresh array (never a view of the caller's
data) so callers may freeze or modify the result freely.
"""

import numbers

import numpy as np

__all__ = [
    "check_square_real",
    "check_symmetric",
    "check_hermitian",
    "check_scalar",
    "check_nonzero",
    "check_parameter_matrix",
]


def check_square_real(M, name="matrix"):
    A = np.array(M, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    return A


def check_symmetric(M, name="matrix", atol=1e-12, rtol=0.0):
    A = check_square_real(M, name)
    gap = float(np.abs(A - A.T).max(initial=0.0))
    if gap > atol + rtol * float(np.abs(A).max(initial=0.0)):
        raise ValueError(f"{name} is not symmetric (max asymmetry {gap:.3e})")
    return A


def check_hermitian(M, name="matrix", atol=1e-12):
    A = np.array(M, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {A.shape}")
    if np.linalg.norm(A - A.conj().T) > atol:
        raise ValueError(f"{name} is not Hermitian")
    return A


def check_scalar(value, name, low=None, high=None, low_inclusive=False, high_inclusive=False):
    """Validate a finite real scalar against optional open/closed bounds."""
    if isinstance(value, bool) or not isinstance(value, (numbers.Real, np.floating, np.integer)):
        raise TypeError(f"{name} must be a real number, got {type(value).__name__}")
    value = float(value)
    if not np.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value}")
    if low is not None and (value < low or (value == low and not low_inclusive)):
        op = ">=" if low_inclusive else ">"
        raise ValueError(f"{name} must be {op} {low}, got {value}")
    if high is not None and (value > high or (value == high and not high_inclusive)):
        op = "<=" if high_inclusive else "<"
        raise ValueError(f"{name} must be {op} {high}, got {value}")
    return value


def check_nonzero(value, name):
    value = check_scalar(value, name)
    if value == 0:
        raise ValueError(f"{name} must be non-zero")
    return value


def check_parameter_matrix(X, n_features=None, name="X"):
    """2-d float array of parameter points, one row per point."""
    A = np.array(X, dtype=float)
    if A.ndim == 1:
        A = A.reshape(1, -1)
    if A.ndim != 2:
        raise ValueError(f"{name} must be 2-d, got {A.ndim}-d")
    if A.shape[0] == 0:
        raise ValueError(f"{name} has no rows")
    if n_features is not None and A.shape[1] != n_features:
        raise ValueError(f"{name} has {A.shape[1]} columns, expected {n_features}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    return A
