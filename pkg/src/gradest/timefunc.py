"""Scalar functions of time on ``(0, T]``.

A :class:`TimeFunction` wraps a callable together with the metadata the
numerical machinery needs: an optional analytic derivative, an optional
asserted limit at ``t -> 0+``, and an optional power hint ``p`` meaning
``value(t) ~ c * t**p`` near zero.  Functions built from quadrature caches
are marked non-vectorized so panel integrators fall back to elementwise
evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .errors import DerivativeUnavailableError, DomainError, TableFormatError

__all__ = [
    "TimeFunction",
    "differentiate",
    "differentiate_info",
    "table_function",
]


@dataclass(frozen=True)
class TimeFunction:
    """A real-valued function of time on ``(0, T]``."""

    fn: Callable[[float], float]
    T: float
    deriv: Optional[Callable[[float], float]] = None
    zero_limit: Optional[float] = None
    power: Optional[float] = None
    vectorized: bool = True
    label: str = ""

    def __call__(self, t):
        return self.fn(t)

    def eval_array(self, ts: np.ndarray) -> np.ndarray:
        if self.vectorized:
            return np.asarray(self.fn(ts), dtype=float)
        return np.array([float(self.fn(t)) for t in np.asarray(ts, dtype=float).ravel()])

    def with_label(self, label: str) -> "TimeFunction":
        return replace(self, label=label)


def _fd_step(T: float, t: float) -> float:
    # Double-precision optimum for second-order central differences.
    return max(1e-7 * T, 1e-6 * t)


def differentiate_info(f: TimeFunction, t: float) -> tuple[float, str]:
    """Derivative of ``f`` at ``t`` plus the method used.

    Returns ``(value, method)`` with method one of ``"analytic"``,
    ``"central"``, ``"one-sided"``.  The analytic derivative, when present,
    is an exact passthrough.  Otherwise a central difference with step
    ``h = max(1e-7*T, 1e-6*t)`` is used; if the stencil would leave
    ``(0, T]``, it shrinks to a second-order one-sided difference and the
    lower-accuracy method is reported.
    """
    if t <= 0.0 or t > f.T:
        raise DomainError(f"derivative requested at t={t} outside (0, {f.T}]")
    if f.deriv is not None:
        return float(f.deriv(t)), "analytic"
    h = _fd_step(f.T, t)
    if t - h > 0.0 and t + h <= f.T:
        return (float(f(t + h)) - float(f(t - h))) / (2.0 * h), "central"
    if t + h > f.T and t - 2.0 * h > 0.0:
        # backward 3-point, still O(h^2)
        return (3.0 * float(f(t)) - 4.0 * float(f(t - h)) + float(f(t - 2.0 * h))) / (2.0 * h), "one-sided"
    h = t / 4.0
    if h <= 0.0 or not math.isfinite(h):
        raise DerivativeUnavailableError(f"no admissible stencil at t={t}")
    if t + 2.0 * h <= f.T:
        return (-3.0 * float(f(t)) + 4.0 * float(f(t + h)) - float(f(t + 2.0 * h))) / (2.0 * h), "one-sided"
    return (float(f(t + min(h, f.T - t))) - float(f(t))) / min(h, f.T - t), "one-sided"


def differentiate(f: TimeFunction, t: float) -> float:
    """Derivative of ``f`` at ``t`` (analytic passthrough when available)."""
    return differentiate_info(f, t)[0]


def table_function(rows, T: float | None = None, label: str = "table") -> TimeFunction:
    """Build a TimeFunction from ``(t, value, derivative)`` rows.

    Rows must have strictly increasing t > 0.  Values are interpolated by
    cubic Hermite pieces, which match both the tabulated values and the
    tabulated derivatives at the knots.  Below the first knot the function
    continues as the C^1 power law ``v1 * (t/t1)**p`` with ``p = t1*d1/v1``
    (positive tables only), so the from-zero integrals and near-zero probes
    of the machinery stay well defined.  Evaluation above the last knot
    raises :class:`DomainError`.
    """
    data = np.asarray(list(rows), dtype=float)
    if data.ndim != 2 or data.shape[1] != 3 or data.shape[0] < 2:
        raise TableFormatError("expected at least two rows of (t, value, derivative)")
    ts, vals, ders = data[:, 0], data[:, 1], data[:, 2]
    if ts[0] <= 0.0:
        raise TableFormatError("table times must be positive")
    if np.any(np.diff(ts) <= 0.0):
        raise TableFormatError("table times must be strictly increasing")
    spline = CubicHermiteSpline(ts, vals, ders)
    dspline = spline.derivative()
    t_lo, t_hi = float(ts[0]), float(ts[-1])
    horizon = float(T) if T is not None else t_hi
    v1, d1 = float(vals[0]), float(ders[0])
    tail_power = t_lo * d1 / v1 if v1 > 0.0 else None

    def _check_hi(tt, t):
        if np.any(tt > t_hi * (1.0 + 1e-12)):
            raise DomainError(f"table covers t <= {t_hi}, asked for t={t}")

    def value(t):
        tt = np.asarray(t, dtype=float)
        _check_hi(tt, t)
        below = tt < t_lo
        if np.any(below):
            if tail_power is None:
                raise DomainError(f"table starts at {t_lo} and is not positive there")
            out = np.where(below, v1 * (np.maximum(tt, 1e-300) / t_lo) ** tail_power,
                           spline(np.maximum(tt, t_lo)))
        else:
            out = spline(tt)
        return float(out) if np.ndim(t) == 0 else out

    def slope(t):
        tt = np.asarray(t, dtype=float)
        _check_hi(tt, t)
        below = tt < t_lo
        if np.any(below):
            if tail_power is None:
                raise DomainError(f"table starts at {t_lo} and is not positive there")
            low = (v1 * tail_power / t_lo) * (np.maximum(tt, 1e-300) / t_lo) ** (tail_power - 1.0)
            out = np.where(below, low, dspline(np.maximum(tt, t_lo)))
        else:
            out = dspline(tt)
        return float(out) if np.ndim(t) == 0 else out

    return TimeFunction(fn=value, T=horizon, deriv=slope, power=tail_power, label=label)
