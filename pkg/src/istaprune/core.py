"""Scalar and vector primitives shared across the library."""

from __future__ import annotations

from typing import Callable

import numpy as np
from scipy.integrate import quad


class IntegrationError(ArithmeticError):
    """Adaptive quadrature could not reach the requested tolerance."""


def as_vector(values) -> np.ndarray:
    """Coerce to a 1-D float64 array, rejecting NaN and infinities."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("vector entries must be finite")
    return arr


def soft_threshold(x, d):
    """Shrink ``x`` toward zero by ``d``, clipping to zero inside [-d, d].

    Element-wise on arrays. ``d`` is a non-negative scalar, or an array of
    non-negative per-component thresholds broadcastable against ``x``.
    """
    d = np.asarray(d, dtype=np.float64)
    if np.any(d < 0.0):
        raise ValueError("threshold must be non-negative")
    x = np.asarray(x, dtype=np.float64)
    return np.sign(x) * np.maximum(np.abs(x) - d, 0.0)


def sign(x: float) -> float:
    """Scalar sign with sign(0) == 0; both signed zeros map to 0."""
    if x > 0:
        return 1.0
    if x < 0:
        return -1.0
    return 0.0


def integrate(h: Callable[[float], float], a: float, b: float, tol: float = 1e-10) -> float:
    """Definite integral of ``h`` over [a, b] with absolute error at most ``tol``.

    Raises IntegrationError when adaptive refinement exhausts its subdivision
    budget without meeting the tolerance.
    """
    if not a <= b:
        raise ValueError(f"integration bounds must satisfy a <= b, got [{a}, {b}]")
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    if a == b:
        return 0.0
    result = quad(h, a, b, epsabs=tol, epsrel=0.0, limit=200, full_output=1)
    if len(result) > 3:
        raise IntegrationError(result[3].strip())
    value, abserr = result[0], result[1]
    if abserr > tol:
        raise IntegrationError(
            f"estimated error {abserr:.3e} exceeds requested tolerance {tol:.3e}"
        )
    return value
