"""Cancellation-safe hyperbolic ratios.

Direct evaluation of quantities like ``(sinh x * cosh x - x) / sinh(x)**2``
loses all significant digits as ``x -> 0`` (the numerator is ``O(x**3)``
built from ``O(x)`` terms) and overflows for large ``x``.  Each helper
switches between a truncated series, the direct formula, and an
``exp(-x)``-based form so that relative accuracy stays near machine level
on all of ``(0, inf)``.
"""

from __future__ import annotations

import math

__all__ = [
    "coth",
    "csch2",
    "inv_minus_coth",
    "csch2_minus_inv_sq",
    "alpha_ratio",
    "alpha_ratio_slope",
]

_SMALL = 0.02
_LARGE = 30.0


def coth(x: float) -> float:
    if x <= 0.0:
        raise ValueError("coth helper defined for x > 0")
    if x < 1e-4:
        # coth(x) = 1/x + x/3 - x^3/45 + 2 x^5/945 - ...
        return 1.0 / x + x / 3.0 - x**3 / 45.0
    if x > _LARGE:
        e = math.exp(-2.0 * x)
        return 1.0 + 2.0 * e / (1.0 - e)
    return 1.0 / math.tanh(x)


def csch2(x: float) -> float:
    """1 / sinh(x)^2 without overflow for large x."""
    if x <= 0.0:
        raise ValueError("csch2 defined for x > 0")
    if x > 350.0:
        return 4.0 * math.exp(-2.0 * x)
    s = math.sinh(x)
    return 1.0 / (s * s)


def inv_minus_coth(x: float) -> float:
    """1/x - coth(x); behaves like -x/3 near zero."""
    if x < 0.0:
        raise ValueError("defined for x >= 0")
    if x < _SMALL:
        x2 = x * x
        return -x * (1.0 / 3.0 - x2 / 45.0 + 2.0 * x2 * x2 / 945.0)
    return 1.0 / x - coth(x)


def csch2_minus_inv_sq(x: float) -> float:
    """csch(x)^2 - 1/x^2; behaves like -1/3 near zero."""
    if x < 0.0:
        raise ValueError("defined for x >= 0")
    if x < _SMALL:
        x2 = x * x
        return -1.0 / 3.0 + x2 / 15.0 - 2.0 * x2 * x2 / 189.0
    return csch2(x) - 1.0 / (x * x)


def alpha_ratio(x: float) -> float:
    """(sinh x - x) / (cosh x - 1): the excess of the hyperbolic alpha over 1.

    Equals ``(sinh(kt)cosh(kt) - kt)/sinh(kt)^2`` at ``x = 2kt``.  Increasing,
    ``~ x/3`` near zero, and ``-> 1`` as ``x -> inf``.
    """
    if x < 0.0:
        raise ValueError("defined for x >= 0")
    if x < _SMALL:
        x2 = x * x
        return (x / 3.0) * (1.0 - x2 / 30.0 + x2 * x2 / 840.0 - x2 * x2 * x2 / 25200.0)
    if x > _LARGE:
        w = math.exp(-x)
        return (1.0 - (2.0 * x + w) * w) / (1.0 - (2.0 - w) * w)
    return (math.sinh(x) - x) / (math.cosh(x) - 1.0)


def alpha_ratio_slope(x: float) -> float:
    """d/dx of :func:`alpha_ratio`: (2 - 2 cosh x + x sinh x) / (cosh x - 1)^2."""
    if x < 0.0:
        raise ValueError("defined for x >= 0")
    if x < _SMALL:
        x2 = x * x
        return (1.0 / 3.0) * (1.0 - x2 / 10.0 + x2 * x2 / 168.0 - x2 * x2 * x2 / 3600.0)
    if x > _LARGE:
        w = math.exp(-x)
        num = (0.5 * x - 1.0) + 2.0 * w - (1.0 + 0.5 * x) * w * w
        den = 1.0 - (2.0 - w) * w
        return 4.0 * w * num / (den * den)
    c = math.cosh(x) - 1.0
    return (2.0 - 2.0 * math.cosh(x) + x * math.sinh(x)) / (c * c)
