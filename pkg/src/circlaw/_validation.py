"""Input checks shared by the estimator layer and the CLI."""
from __future__ import annotations

import numbers

import numpy as np
from sklearn.utils import check_array


def check_square_matrix(M, name: str = "M") -> np.ndarray:
    """Finite real 2-D square float array."""
    M = check_array(M, dtype=np.float64, ensure_all_finite=True, input_name=name)
    if M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be square, got shape {M.shape}")
    return M


def check_complex(z, name: str = "z") -> complex:
    try:
        z = complex(z)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"{name} must be a complex number") from exc
    if not (np.isfinite(z.real) and np.isfinite(z.imag)):
        raise ValueError(f"{name} must be finite")
    return z


def check_positive_int(value, name: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ValueError(f"{name} must be an integer")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}")
    return int(value)


def check_probability(p, name: str = "p_n") -> float:
    p = float(p)
    if not 0.0 < p <= 1.0:
        raise ValueError(f"{name} must lie in (0, 1]")
    return p


def check_nonnegative(x, name: str) -> float:
    x = float(x)
    if not (np.isfinite(x) and x >= 0):
        raise ValueError(f"{name} must be a finite non-negative number")
    return x
