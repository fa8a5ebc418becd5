"""Quadrature on ``(0, t]`` for integrands with an integrable endpoint singularity.

The endpoint scheme never evaluates at ``t = 0``: the interval is split into
geometric octaves ``[t/2^(j+1), t/2^j]``, each integrated by adaptive
Gauss-Legendre panels, and the partial sums are Richardson/Aitken
extrapolated.  For an integrand ``~ c * s**p`` the octave contributions form
a geometric sequence with ratio ``2**-(p+1)``, so the extrapolated sums
converge for every integrable power ``p > -1`` and visibly diverge for
``p <= -1``.

:class:`CumulativeIntegral` memoizes ``int_0^t f`` on a refinable log-spaced
anchor grid; arbitrary ``t`` costs one short smooth panel from the nearest
anchor below.  The cache is lock-protected, so concurrent readers are safe.
"""

from __future__ import annotations

import bisect
import math
import threading
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidParameterError, QuadratureNonConvergenceError
from .extrapolate import aitken_accelerate
from .timefunc import TimeFunction

__all__ = ["QuadratureSpec", "integrate_from_zero", "integrate_panel", "CumulativeIntegral"]

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and the smallest lower limit used in place of zero.

    ``t_floor=None`` resolves to ``1e-12`` times the upper limit of each
    integral, so nested small-time integrals (limit probes at ``t ~ 1e-12*T``)
    remain well-posed.
    """

    rel_tol: float = 1e-12
    abs_tol: float = 1e-250
    t_floor: Optional[float] = None

    def __post_init__(self):
        if self.rel_tol <= 0.0 or self.abs_tol <= 0.0:
            raise InvalidParameterError("rel_tol and abs_tol must be positive")
        if self.t_floor is not None and self.t_floor < 0.0:
            raise InvalidParameterError("t_floor must be >= 0")

    def floor_for(self, upper: float) -> float:
        return self.t_floor if self.t_floor is not None else 1e-12 * upper


DEFAULT_SPEC = QuadratureSpec()


def _gl16(f: TimeFunction, a: float, b: float) -> float:
    half = 0.5 * (b - a)
    nodes = a + half * (_GL_X + 1.0)
    vals = f.eval_array(nodes)
    return half * float(np.dot(_GL_W, vals))


def integrate_panel(f: TimeFunction, a: float, b: float, rel_tol: float = 1e-13,
                    abs_tol: float = 1e-250, _budget: list | None = None) -> float:
    """Adaptive Gauss-Legendre integration of a smooth integrand on [a, b].

    The subdivision budget bounds the worst case on noisy integrands (where
    bisection cannot meet the tolerance) without hurting smooth ones, which
    converge within a few levels.
    """
    if b <= a:
        return 0.0
    if _budget is None:
        _budget = [512]
    whole = _gl16(f, a, b)
    mid = 0.5 * (a + b)
    halves = _gl16(f, a, mid) + _gl16(f, mid, b)
    err = abs(halves - whole)
    if (err <= max(abs_tol, rel_tol * abs(halves)) or _budget[0] <= 0
            or (b - a) <= 64.0 * np.finfo(float).eps * max(abs(a), abs(b))):
        return halves
    _budget[0] -= 1
    return (integrate_panel(f, a, mid, rel_tol, abs_tol, _budget)
            + integrate_panel(f, mid, b, rel_tol, abs_tol, _budget))


def integrate_from_zero(f: TimeFunction, t: float, spec: QuadratureSpec | None = None) -> float:
    """``int_0^t f(s) ds`` for integrands continuous on ``(0, t]``.

    Admits an integrable power singularity at zero.  Raises
    :class:`QuadratureNonConvergenceError` when the geometric partial sums
    fail to settle before the lower edge reaches the floor, the signature of
    a non-integrable endpoint.
    """
    spec = spec or DEFAULT_SPEC
    if t <= 0.0:
        raise InvalidParameterError(f"upper limit must be positive, got {t}")
    floor = spec.floor_for(t)
    panel_rel = min(1e-13, 0.1 * spec.rel_tol)

    sums: list[float] = []
    total = 0.0
    hi = t
    acc_prev = math.nan
    small_streak = 0
    grow_streak = 0
    prev_piece = math.inf
    while True:
        lo = 0.5 * hi
        piece = integrate_panel(f, lo, hi, rel_tol=panel_rel)
        total += piece
        sums.append(total)
        tol = max(spec.abs_tol, spec.rel_tol * abs(total))

        # octave contributions of an integrable power shrink geometrically;
        # non-shrinking ones mean exponent <= -1 (Aitken would otherwise
        # "stabilize" on a meaningless backward extrapolation)
        if abs(piece) >= 0.999 * abs(prev_piece) and abs(piece) > tol:
            grow_streak += 1
            if grow_streak >= 3:
                raise QuadratureNonConvergenceError(
                    f"octave contributions of {f.label or 'integrand'} on (0, {t}] do not "
                    f"shrink (last {piece:.3e}); endpoint non-integrable")
        else:
            grow_streak = 0
        prev_piece = piece

        if abs(piece) <= 0.01 * tol:
            small_streak += 1
            if small_streak >= 2:
                return aitken_accelerate(sums) if len(sums) >= 4 else total
        else:
            small_streak = 0

        if len(sums) >= 5:
            acc = aitken_accelerate(sums[-12:])
            acc_tol = max(spec.abs_tol, spec.rel_tol * abs(acc))
            if math.isfinite(acc) and math.isfinite(acc_prev) and abs(acc - acc_prev) <= acc_tol:
                return acc
            acc_prev = acc

        if lo <= floor:
            if abs(piece) <= 10.0 * tol and math.isfinite(acc_prev):
                return acc_prev
            raise QuadratureNonConvergenceError(
                f"partial sums of {f.label or 'integrand'} on (0, {t}] did not settle "
                f"(last octave contributed {piece:.3e}); endpoint likely non-integrable")
        hi = lo


class CumulativeIntegral:
    """Memoized ``F(t) = int_0^t f(s) ds`` on a lazily filled log anchor grid.

    Anchors run geometrically from ``T * 2**bottom_exponent`` up to ``T``;
    the value below the lowest anchor comes from :func:`integrate_from_zero`.
    Evaluation at an arbitrary ``t`` adds one smooth panel from the nearest
    filled anchor below, so it is both cheap and a smooth function of ``t``
    (finite differences of the result are clean).
    """

    def __init__(self, f: TimeFunction, T: float, spec: QuadratureSpec | None = None,
                 points_per_octave: int = 2, bottom_exponent: int = -44):
        if T <= 0.0:
            raise InvalidParameterError("horizon T must be positive")
        self.f = f
        self.T = float(T)
        self.spec = spec or DEFAULT_SPEC
        n_oct = -bottom_exponent
        count = n_oct * points_per_octave + 1
        exps = np.linspace(bottom_exponent, 0.0, count)
        self._anchors = [self.T * 2.0 ** e for e in exps]
        self._values: list[float] = []
        self._lock = threading.Lock()
        self._panel_rel = min(1e-13, 0.1 * self.spec.rel_tol)

    def _fill_to(self, idx: int) -> None:
        with self._lock:
            if not self._values:
                self._values.append(integrate_from_zero(self.f, self._anchors[0], self.spec))
            while len(self._values) <= idx:
                j = len(self._values)
                piece = integrate_panel(self.f, self._anchors[j - 1], self._anchors[j],
                                        rel_tol=self._panel_rel)
                self._values.append(self._values[-1] + piece)

    def value(self, t: float) -> float:
        if t <= 0.0:
            raise InvalidParameterError(f"cumulative integral needs t > 0, got {t}")
        if t < self._anchors[0]:
            return integrate_from_zero(self.f, t, self.spec)
        idx = bisect.bisect_right(self._anchors, t) - 1
        self._fill_to(idx)
        base = self._values[idx]
        return base + integrate_panel(self.f, self._anchors[idx], t, rel_tol=self._panel_rel)

    def as_timefunction(self, label: str = "") -> TimeFunction:
        return TimeFunction(fn=self.value, T=self.T, deriv=self.f.fn,
                            vectorized=False, label=label or f"int({self.f.label})")
