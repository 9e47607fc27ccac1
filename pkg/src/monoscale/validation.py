"""Input validation helpers shared by the estimators and geometry functions."""

import numbers

import numpy as np


def as_float_array(x, name, shape=None, allow_empty=True):
    """Coerce to a float64 ndarray, checking finiteness and optional shape.

    `shape` entries of -1 match any extent, e.g. ``(-1, 3)`` for N-by-3.
    """
    arr = np.asarray(x, dtype=np.float64)
    if shape is not None:
        if arr.ndim != len(shape):
            raise ValueError(f"{name}: expected {len(shape)}-d array, got {arr.ndim}-d")
        for axis, want in enumerate(shape):
            if want != -1 and arr.shape[axis] != want:
                raise ValueError(
                    f"{name}: expected shape {shape}, got {arr.shape}"
                )
    if not allow_empty and arr.size == 0:
        raise ValueError(f"{name}: must not be empty")
    if arr.size and not np.isfinite(arr).all():
        raise ValueError(f"{name}: contains non-finite values")
    return arr


def check_positive(value, name):
    if not (isinstance(value, numbers.Real) and np.isfinite(value) and value > 0):
        raise ValueError(f"{name} must be a positive finite number, got {value!r}")
    return float(value)


def check_random_state(random_state):
    """Return a numpy Generator for an int seed, seed sequence, or Generator."""
    if isinstance(random_state, np.random.Generator):
        return random_state
    return np.random.default_rng(random_state)
