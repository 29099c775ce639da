"""Input validation helpers shared by the estimator API and the library."""

from __future__ import annotations

import math
from numbers import Integral, Real

import numpy as np


class NeverDetectable(ValueError):
    """A link cannot reach the SNR threshold even at the shortest distance."""


class TooLarge(RuntimeError):
    """An exact search exceeds the configured enumeration budget."""


class Infeasible(RuntimeError):
    """No demand can be routed in the given scenario."""


def check_finite(x, name: str) -> float:
    if not isinstance(x, Real) or isinstance(x, bool):
        raise TypeError(f"{name} must be a real number, got {type(x).__name__}")
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"{name} must be finite, got {x}")
    return x


def check_positive(x, name: str) -> float:
    x = check_finite(x, name)
    if x <= 0.0:
        raise ValueError(f"{name} must be > 0, got {x}")
    return x


def check_nonnegative(x, name: str) -> float:
    x = check_finite(x, name)
    if x < 0.0:
        raise ValueError(f"{name} must be >= 0, got {x}")
    return x


def check_angle(alpha, name: str = "alpha", upper: float = math.pi) -> float:
    """Angle in radians strictly inside ``(0, upper)``."""
    alpha = check_finite(alpha, name)
    if not 0.0 < alpha < upper:
        raise ValueError(f"{name} must lie in (0, {upper:g}) rad, got {alpha}")
    return alpha


def check_count(n, name: str, minimum: int = 0) -> int:
    if not isinstance(n, Integral) or isinstance(n, bool):
        raise TypeError(f"{name} must be an integer, got {type(n).__name__}")
    if n < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {n}")
    return int(n)


def check_vec3(v, name: str = "vector") -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.shape != (3,):
        raise ValueError(f"{name} must have shape (3,), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr

