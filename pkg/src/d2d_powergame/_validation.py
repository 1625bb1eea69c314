"""Input validation helpers shared by the public functions."""
import numbers

import numpy as np

from .exceptions import ContractViolation


def check_power_vector(p, n, *, positive=True, name="p"):
    """Return ``p`` as a float64 vector of length ``n``.

    Raises ContractViolation on wrong shape, non-finite entries, or, when
    ``positive`` is set, any entry <= 0.
    """
    arr = np.asarray(p, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] != n:
        raise ContractViolation(f"{name} must have shape ({n},), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ContractViolation(f"{name} contains non-finite entries")
    if positive and np.any(arr <= 0):
        raise ContractViolation(f"{name} must be strictly positive")
    if not positive and np.any(arr < 0):
        raise ContractViolation(f"{name} must be non-negative")
    return arr


def check_index(i, n):
    if not isinstance(i, numbers.Integral) or isinstance(i, bool):
        raise ContractViolation(f"device index must be an integer, got {i!r}")
    if not 0 <= i < n:
        raise ContractViolation(f"device index {i} out of range for n={n}")
    return int(i)


def check_positive(value, name):
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise ContractViolation(f"{name} must be finite and > 0, got {value}")
    return value
