"""Check gradient bounds against model data and compare bound families.

The central quantity is ``G = beta |grad f|^2 - f_t - psi``, which every
valid bound keeps nonpositive on its domain.  Verification sweeps G over an
(r, t) grid; the tolerance separates numerical noise from a genuine
counterexample (absolute for exact data, relative to the local derivative
scale for finite-difference data).

Family comparisons are tabulated in both forms, and dominance is judged on
the alpha-form value phi: that is the form in which a constant-alpha bound
with a finite large-time limit beats the time-dependent families, while the
raw beta-form psi of a family whose beta decays to zero is not comparable
across different betas.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .context import EstimateContext
from .errors import BracketError, DomainError, HypothesisMismatchError, InvalidParameterError
from .extrapolate import sequence_limit
from .families import GradientBound, make_family
from .manifolds import LogHeatData
from .reporting import fmt

__all__ = [
    "VerificationReport",
    "ComparisonTable",
    "verify_bound",
    "sharpness_ratio",
    "sharpness_limit",
    "compare_bounds",
    "find_crossover",
    "asymptotic_limits",
    "AsymptoticResult",
    "improved_equals_qian_at_theta0",
    "default_r_grid",
    "default_t_grid",
]

EXACT_TOL = 1e-9
NUMERIC_REL_TOL = 1e-3


def _thread_count() -> int:
    raw = os.environ.get("GRADEST_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass
class VerificationReport:
    """Grid sweep outcome for one (bound, data) pair."""

    bound_id: str
    data_id: str
    r_grid: list[float]
    t_grid: list[float]
    tol_policy: str
    max_G: float
    argmax: tuple[float, float]
    violations: list[tuple[float, float, float]]
    margin_curve: list[tuple[float, float]]     # (t, min over r of -G)
    G: np.ndarray = field(repr=False)           # shape (len(t), len(r))

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {
            "bound": self.bound_id,
            "data": self.data_id,
            "passed": self.passed,
            "tolerance": self.tol_policy,
            "max_G": self.max_G,
            "argmax": {"r": self.argmax[0], "t": self.argmax[1]},
            "violations": [
                {"r": r, "t": t, "G": g} for r, t, g in self.violations
            ],
            "grid": {"r_points": len(self.r_grid), "t_points": len(self.t_grid)},
            "margin_curve": [{"t": t, "margin": m} for t, m in self.margin_curve],
        }

    def grid_rows(self):
        """Rows (r, t, G) for CSV emission."""
        for j, t in enumerate(self.t_grid):
            for i, r in enumerate(self.r_grid):
                yield (r, t, float(self.G[j, i]))


def default_r_grid(data: LogHeatData, points: int = 40) -> np.ndarray:
    """0 plus log-spaced radii up to half the data window (boundary-safe half)."""
    r_hi = data.r_max / 2.0
    return np.concatenate([[0.0], np.geomspace(1e-3 * r_hi, r_hi, points)])


def default_t_grid(bound: GradientBound, data: LogHeatData, points: int = 60) -> np.ndarray:
    """Log-spaced times across the intersected validity window."""
    lo = max(data.t_range[0], bound.t_min)
    hi = min(data.t_range[1], bound.ctx.T)
    if lo >= hi:
        raise DomainError(
            f"empty validity window for {bound.id} on {data.label}: ({lo}, {hi}]")
    if bound.t_min >= data.t_range[0]:
        lo = lo + 1e-3 * (hi - lo)   # psi may diverge at t_min; keep the grid off it
    return np.geomspace(lo, hi, points)


def verify_bound(bound: GradientBound, data: LogHeatData,
                 r_grid: Optional[Sequence[float]] = None,
                 t_grid: Optional[Sequence[float]] = None,
                 tol: Optional[float] = None) -> VerificationReport:
    """Sweep G = beta |grad f|^2 - f_t - psi over the grid.

    A hypothesis mismatch (data curvature below the bound's, or a different
    dimension) is an error, not a failed verification.  The default
    tolerance is 1e-9 absolute on exact data and 1e-3 of the local scale
    ``|f_t| + |grad f|^2`` on numeric data.
    """
    if data.n != bound.ctx.n:
        raise HypothesisMismatchError(
            f"data dimension n={data.n} differs from bound dimension n={bound.ctx.n}")
    if data.k > bound.ctx.k + 1e-12:
        raise HypothesisMismatchError(
            f"data needs Ric >= -{data.k} but the bound only assumes Ric >= -{bound.ctx.k}")

    r = np.asarray(r_grid, dtype=float) if r_grid is not None else default_r_grid(data)
    t = np.asarray(t_grid, dtype=float) if t_grid is not None else default_t_grid(bound, data)
    for tv in t:
        data.check_window(r, float(tv))
        bound._check_domain(float(tv))

    exact = data.kind == "exact"
    if tol is not None:
        tol_policy = f"absolute {fmt(tol)}"
    elif exact:
        tol, tol_policy = EXACT_TOL, f"absolute {fmt(EXACT_TOL)}"
    else:
        tol, tol_policy = None, f"relative {fmt(NUMERIC_REL_TOL)} * (|f_t| + |grad f|^2)"

    def row(j):
        tv = float(t[j])
        sample = bound.evaluate(tv)
        grad = np.asarray(data.grad_sq(r, tv), dtype=float)
        ft = np.asarray(data.f_t(r, tv), dtype=float)
        g_row = sample.beta * grad - ft - sample.psi
        if tol is not None:
            tol_row = np.full_like(g_row, tol)
        else:
            tol_row = NUMERIC_REL_TOL * (np.abs(ft) + np.abs(grad))
        return g_row, tol_row

    workers = _thread_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(row, range(len(t))))
    else:
        results = [row(j) for j in range(len(t))]

    G = np.vstack([g for g, _ in results])
    tol_grid = np.vstack([tl for _, tl in results])

    flat = int(np.argmax(G))
    j_max, i_max = divmod(flat, len(r))
    violations = [(float(r[i]), float(t[j]), float(G[j, i]))
                  for j, i in zip(*np.where(G > tol_grid))]
    margins = [(float(t[j]), float(np.min(-G[j, :]))) for j in range(len(t))]
    return VerificationReport(
        bound_id=bound.id, data_id=data.label,
        r_grid=[float(x) for x in r], t_grid=[float(x) for x in t],
        tol_policy=tol_policy, max_G=float(G[j_max, i_max]),
        argmax=(float(r[i_max]), float(t[j_max])),
        violations=violations, margin_curve=margins, G=G,
    )


def sharpness_ratio(bound: GradientBound, t_seq: Sequence[float]) -> list[float]:
    """(n/(2t)) / psi(t) along a decreasing time sequence.

    The numerator is the flat-space center value of |grad f|^2 - f_t, so a
    limit of 1 certifies a sharp leading term while a constant-beta family
    limits to its beta.
    """
    n = bound.ctx.n
    return [n / (2.0 * t) / bound.formula_sample(t).psi for t in t_seq]


def sharpness_limit(bound: GradientBound, j_lo: int = 5, j_hi: int = 20) -> float:
    """Extrapolated small-time limit of the sharpness ratio along t = 2^-j."""
    ratios = sharpness_ratio(bound, [2.0 ** -j for j in range(j_lo, j_hi + 1)])
    value, _ = sequence_limit(ratios, rel_tol=1e-9)
    return value


@dataclass
class ComparisonTable:
    """psi/phi values per family on a shared time grid with dominance flags.

    ``dominant[i]`` is the id of the family with the smallest alpha-form
    value phi among those valid at ``t_grid[i]`` (ties break lexicographically
    on the id), or None when no family is valid there.
    """

    t_grid: list[float]
    ids: list[str]
    psi: dict[str, list[Optional[float]]]
    phi: dict[str, list[Optional[float]]]
    dominant: list[Optional[str]]

    def rows(self):
        header = (["t"] + [f"psi[{i}]" for i in self.ids]
                  + [f"phi[{i}]" for i in self.ids] + ["dominant"])
        yield header
        for i, t in enumerate(self.t_grid):
            row = [t]
            row += [self.psi[b][i] if self.psi[b][i] is not None else "" for b in self.ids]
            row += [self.phi[b][i] if self.phi[b][i] is not None else "" for b in self.ids]
            row.append(self.dominant[i] or "")
            yield row


def compare_bounds(bounds: Sequence[GradientBound], t_grid: Sequence[float]) -> ComparisonTable:
    """Tabulate families on a shared grid; entries outside validity are absent."""
    if not bounds:
        raise InvalidParameterError("compare_bounds needs at least one bound")
    ref = bounds[0].ctx
    for b in bounds[1:]:
        if b.ctx.n != ref.n or b.ctx.k != ref.k:
            raise HypothesisMismatchError(
                f"bounds must share (n, k): {b.id} has ({b.ctx.n}, {b.ctx.k}), "
                f"expected ({ref.n}, {ref.k})")
    ids = [b.id for b in bounds]
    if len(set(ids)) != len(ids):
        raise InvalidParameterError(f"duplicate bound ids in comparison: {ids}")

    t_list = [float(t) for t in t_grid]
    psi = {i: [] for i in ids}
    phi = {i: [] for i in ids}
    dominant: list[Optional[str]] = []
    any_valid = False
    for t in t_list:
        best = None
        for b in bounds:
            if b.t_min < t <= b.ctx.T:
                s = b.evaluate(t)
                psi[b.id].append(s.psi)
                phi[b.id].append(s.phi)
                if best is None or (s.phi, b.id) < best[0]:
                    best = ((s.phi, b.id), b.id)
            else:
                psi[b.id].append(None)
                phi[b.id].append(None)
        dominant.append(best[1] if best else None)
        any_valid = any_valid or best is not None
    if not any_valid:
        raise DomainError("no grid point lies in any bound's validity domain")
    return ComparisonTable(t_grid=t_list, ids=ids, psi=psi, phi=phi, dominant=dominant)


def find_crossover(b1: GradientBound, b2: GradientBound,
                   bracket: tuple[float, float], rel_width: float = 1e-10) -> float:
    """Bisect the time where psi_1 - psi_2 changes sign inside the bracket.

    The bracket must contain exactly one sign change; none or several (as
    detected on a refinement prescan) is a :class:`BracketError`.
    """
    t_lo, t_hi = float(bracket[0]), float(bracket[1])
    if not (0.0 < t_lo < t_hi):
        raise InvalidParameterError(f"bad bracket {bracket}")

    def d(t):
        return b1.evaluate(t).psi - b2.evaluate(t).psi

    scan = np.linspace(t_lo, t_hi, 65)
    signs = np.sign([d(float(t)) for t in scan])
    changes = [i for i in range(len(scan) - 1)
               if signs[i] != 0 and signs[i + 1] != 0 and signs[i] != signs[i + 1]]
    if not changes:
        raise BracketError(f"psi difference does not change sign on [{t_lo}, {t_hi}]")
    if len(changes) > 1:
        raise BracketError(f"multiple sign changes detected on [{t_lo}, {t_hi}]")
    lo, hi = float(scan[changes[0]]), float(scan[changes[0] + 1])
    s_lo = d(lo)
    while (hi - lo) > rel_width * hi:
        mid = 0.5 * (lo + hi)
        if d(mid) * s_lo > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class AsymptoticResult:
    alpha_inf: Optional[float]   # None means divergent
    phi_inf: Optional[float]

    def as_dict(self):
        return {"alpha_inf": self.alpha_inf, "phi_inf": self.phi_inf}


def asymptotic_limits(bound: GradientBound, j_lo: int = 1, j_hi: int = 20) -> AsymptoticResult:
    """Large-time limits of the alpha-form pair along t = 2^j / k.

    Probes geometrically growing times with Aitken extrapolation; overflow,
    nonfinite values, or a non-settling sequence report as divergent.
    """
    k = bound.ctx.k if bound.ctx.k > 0.0 else 1.0
    alphas, phis = [], []
    for j in range(j_lo, j_hi + 1):
        t = 2.0 ** j / k
        if t <= bound.t_min:
            continue
        try:
            s = bound.formula_sample(t)
            a, p = s.alpha, s.phi
        except (OverflowError, ZeroDivisionError):
            break
        if not (math.isfinite(a) and math.isfinite(p)):
            break
        alphas.append(a)
        phis.append(p)

    def settle(seq):
        if len(seq) < 6:
            return None
        # raw increments must shrink: Aitken alone would "extrapolate" affine
        # growth c*2^j to its base and miss the divergence
        d1 = abs(seq[-1] - seq[-2])
        d0 = abs(seq[-2] - seq[-3])
        scale = max(1.0, abs(seq[-1]))
        if d1 > 1e-7 * scale and d1 >= 0.75 * d0:
            return None
        value, stable = sequence_limit(seq, rel_tol=1e-9, abs_tol=1e-12)
        return value if stable else None

    return AsymptoticResult(alpha_inf=settle(alphas), phi_inf=settle(phis))


def improved_equals_qian_at_theta0(ctx: EstimateContext, beta0: float,
                                   t0: float) -> tuple[float, float, float]:
    """Evaluate the theta-substitution consistency at one (beta0, t0).

    With ``theta0 = (1 - beta0)/(k beta0 t0)`` in (0, 1), the theta-family
    bound at t0 must coincide with improved-lyd(beta0) at t0.  Returns
    (theta-family psi, improved psi, difference).
    """
    ctx.require_positive_k("theta substitution")
    if not (0.0 < beta0 < 1.0):
        raise InvalidParameterError(f"beta0 must lie in (0, 1), got {beta0}")
    if not (0.0 < t0 <= ctx.T):
        raise InvalidParameterError(f"t0 must lie in (0, T], got {t0}")
    theta0 = (1.0 - beta0) / (ctx.k * beta0 * t0)
    if not (0.0 < theta0 < 1.0):
        raise InvalidParameterError(
            f"theta0 = (1-beta0)/(k beta0 t0) = {theta0} falls outside (0, 1); "
            f"need t0 > (1-beta0)/(k beta0)")
    lhs = make_family(ctx, "qian-theta", {"theta": theta0}).evaluate(t0).psi
    rhs = make_family(ctx, "improved-lyd", {"beta": beta0}).evaluate(t0).psi
    return lhs, rhs, lhs - rhs
