"""Input validation helpers."""
import numpy as np
from sklearn.utils import check_array

from .exceptions import DimensionError


def check_matrix(a, name="matrix", *, allow_empty=False):
    """Return ``a`` as a finite, C-contiguous 2-D float64 array.

    The returned array is a fresh copy with the write flag cleared, so callers
    can hand it out without worrying about aliasing.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {a.shape}")
    if a.size == 0:
        if not allow_empty:
            raise DimensionError(f"{name} is empty (shape {a.shape})")
        out = np.array(a, dtype=np.float64, order="C")
    else:
        try:
            out = check_array(
                a, dtype=np.float64, order="C", copy=True, ensure_all_finite=True,
                input_name=name,
            )
        except ValueError as exc:
            raise DimensionError(str(exc)) from exc
    out.flags.writeable = False
    return out


def check_vector(x, name="vector"):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise DimensionError(f"{name} must be 1-D, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise DimensionError(f"{name} contains NaN or Inf")
    return x


def check_square(a, name="matrix"):
    a = check_matrix(a, name)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {a.shape}")
    return a


def frozen(a):
    """Mark a freshly computed array read-only and return it."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.flags.writeable = False
    return a
