"""Input validation helpers in the spirit of ``sklearn.utils.validation``."""
import math

import numpy as np
from sklearn.utils import check_array

from .exceptions import DimensionMismatchError, InvalidParameterError


def check_vector(x, dim=None, name="x"):
    """Return ``x`` as a finite 1-d float array, optionally of length ``dim``."""
    arr = check_array(np.atleast_1d(np.asarray(x, dtype=float)), ensure_2d=False,
                      ensure_all_finite=True, dtype=np.float64, input_name=name)
    if arr.ndim != 1:
        raise DimensionMismatchError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise DimensionMismatchError(f"{name} has dimension {arr.shape[0]}, expected {dim}")
    return arr


def check_positive(value, name, strict=True):
    value = float(value)
    if not math.isfinite(value) or (value <= 0 if strict else value < 0):
        bound = "> 0" if strict else ">= 0"
        raise InvalidParameterError(f"{name} must be {bound}, got {value}")
    return value


def check_count(n, name, minimum=1):
    if isinstance(n, float) and n.is_integer():
        n = int(n)
    if not isinstance(n, (int, np.integer)) or n < minimum:
        raise InvalidParameterError(f"{name} must be an integer >= {minimum}, got {n!r}")
    return int(n)
