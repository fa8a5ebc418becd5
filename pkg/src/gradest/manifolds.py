"""Log-heat-kernel data on model spaces.

Supplies ``|grad f|^2`` and ``f_t`` for ``f = log u`` where ``u`` is a
positive solution of the heat equation, on spaces whose Ricci lower bound
is known exactly:

* Euclidean space (k = 0): the Gaussian kernel, where
  ``|grad f|^2 - f_t == n/(2t)`` identically - the equality case that makes
  small-time sharpness testable.
* Hyperbolic 3-space at curvature -1 (Ric = -2g, so k = 2): the closed-form
  kernel ``(4 pi t)^{-3/2} (r / sinh r) exp(-t - r^2/(4t))``.
* Any dimension n >= 2 numerically, by a Crank-Nicolson march of the radial
  heat equation ``u_t = u_rr + (n-1) coth(r) u_r`` at curvature -1
  (k = n - 1).

The heat residual ``lap f + |grad f|^2 - f_t`` (identically zero for true
solutions) acts as the data-quality gate before any verification run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from scipy.linalg import solve_banded

from .errors import DomainError, InvalidParameterError, SolverError, TableFormatError
from .hyperbolic import coth, csch2_minus_inv_sq, inv_minus_coth

__all__ = [
    "LogHeatData",
    "RadialSolverConfig",
    "euclidean_gaussian",
    "hyperbolic3_kernel",
    "radial_heat_solve",
    "refine",
    "heat_residual",
    "save_solution_csv",
    "load_solution_csv",
]


@dataclass(frozen=True)
class LogHeatData:
    """Derived log-solution quantities on a model space.

    ``grad_sq``/``f_t``/``laplacian`` map ``(r, t)`` (scalar or r-array at a
    fixed t) to values of ``|grad f|^2``, ``f_t``, ``lap f``.  ``kind`` is
    ``"exact"`` or ``"numeric"``; the heat residual of exact data is machine
    zero, numeric data is trusted to discretization accuracy inside
    ``r <= r_max``, ``t_range[0] <= t <= t_range[1]``.
    """

    n: int
    k: float
    kind: str
    r_max: float
    t_range: tuple[float, float]
    grad_sq: Callable
    f_t: Callable
    laplacian: Callable
    u: Optional[Callable] = None
    label: str = ""
    r_grid: Optional[np.ndarray] = None
    t_grid: Optional[np.ndarray] = None
    u_grid: Optional[np.ndarray] = None

    def check_window(self, r, t) -> None:
        r = np.asarray(r, dtype=float)
        if np.any(r < 0.0) or np.any(r > self.r_max):
            raise DomainError(f"r outside [0, {self.r_max}] for {self.label}")
        if not (self.t_range[0] <= t <= self.t_range[1]):
            raise DomainError(f"t={t} outside window {self.t_range} for {self.label}")

    def residual_scale(self, r, t):
        """Local magnitude |lap f| + |grad f|^2 + |f_t| used for relative tolerances."""
        return (np.abs(self.laplacian(r, t)) + np.abs(self.grad_sq(r, t))
                + np.abs(self.f_t(r, t)))


def _radial(fn):
    """Accept scalar or array r; return matching shape."""
    def wrapped(r, t):
        arr = np.atleast_1d(np.asarray(r, dtype=float))
        out = fn(arr, t)
        return float(out[0]) if np.ndim(r) == 0 else out
    return wrapped


def euclidean_gaussian(n: int) -> LogHeatData:
    """Gaussian heat kernel on R^n; k = 0 and the bound identity is exact."""
    if n < 1:
        raise InvalidParameterError(f"dimension must be >= 1, got {n}")

    @_radial
    def grad_sq(r, t):
        return r * r / (4.0 * t * t)

    @_radial
    def f_t(r, t):
        return -n / (2.0 * t) + r * r / (4.0 * t * t)

    @_radial
    def laplacian(r, t):
        return np.full_like(r, -n / (2.0 * t))

    @_radial
    def u(r, t):
        return (4.0 * math.pi * t) ** (-0.5 * n) * np.exp(-r * r / (4.0 * t))

    return LogHeatData(n=n, k=0.0, kind="exact", r_max=16.0, t_range=(0.05, 5.0),
                       grad_sq=grad_sq, f_t=f_t, laplacian=laplacian, u=u,
                       label=f"euclidean-gaussian(n={n})")


# radius below which the series forms of 1/r - coth r and csch^2 r - 1/r^2 are used
_H3_SERIES_R = 1e-3


def _h3_radial_slope(r):
    """The time-free part of f_r: 1/r - coth r (series below the switch radius)."""
    out = np.empty_like(r)
    small = r < _H3_SERIES_R
    rs = r[small]
    out[small] = -(rs / 3.0 - rs**3 / 45.0)
    rb = r[~small]
    out[~small] = 1.0 / rb - np.cosh(rb) / np.sinh(rb)
    return out


def _h3_d2(r):
    """csch^2 r - 1/r^2, the r-curvature part of f_rr."""
    out = np.empty_like(r)
    small = r < _H3_SERIES_R
    rs = r[small]
    out[small] = -1.0 / 3.0 + rs * rs / 15.0
    rb = r[~small]
    out[~small] = 1.0 / np.sinh(rb) ** 2 - 1.0 / (rb * rb)
    return out


def _h3_coth_terms(r):
    """(coth r * (1/r - coth r), coth r * r) with the r -> 0 limits built in."""
    cg = np.empty_like(r)
    cr = np.empty_like(r)
    small = r < _H3_SERIES_R
    rs = r[small]
    cg[small] = -1.0 / 3.0 - 4.0 * rs * rs / 45.0
    cr[small] = 1.0 + rs * rs / 3.0
    rb = r[~small]
    c = np.cosh(rb) / np.sinh(rb)
    cg[~small] = c * (1.0 / rb - c)
    cr[~small] = c * rb
    return cg, cr


@_radial
def _h3_u(r, t):
    ratio = np.where(r < _H3_SERIES_R, 1.0 - r * r / 6.0, r / np.sinh(np.maximum(r, 1e-300)))
    return (4.0 * math.pi * t) ** -1.5 * ratio * np.exp(-t - r * r / (4.0 * t))


def hyperbolic3_kernel() -> LogHeatData:
    """Closed-form heat kernel on hyperbolic 3-space (curvature -1, k = 2)."""

    @_radial
    def grad_sq(r, t):
        fr = _h3_radial_slope(r) - r / (2.0 * t)
        return fr * fr

    @_radial
    def f_t(r, t):
        return -1.5 / t - 1.0 + r * r / (4.0 * t * t)

    @_radial
    def laplacian(r, t):
        # lap f = f_rr + 2 coth(r) f_r with f_r = (1/r - coth r) - r/(2t)
        d2 = _h3_d2(r)
        cg, cr = _h3_coth_terms(r)
        return d2 - 1.0 / (2.0 * t) + 2.0 * cg - cr / t

    return LogHeatData(n=3, k=2.0, kind="exact", r_max=16.0, t_range=(0.05, 5.0),
                       grad_sq=grad_sq, f_t=f_t, laplacian=laplacian, u=_h3_u,
                       label="h3-kernel")


# ---------------------------------------------------------------------------
# radial Crank-Nicolson solver

@dataclass(frozen=True)
class RadialSolverConfig:
    """Grid and step policy for the radial march on H^n (curvature -1).

    ``dt_init=None`` resolves to ``0.01 * t_start``; steps then grow
    geometrically so that dt stays proportional to t.  ``seed`` chooses the
    initial profile: ``"exact"`` (closed-form kernel, n = 3 only),
    ``"euclidean"`` (transplanted flat Gaussian, relaxed by the march), or
    ``"auto"`` (exact when available, else euclidean).
    """

    n: int
    r_max: float = 12.0
    n_r: int = 1200
    t_start: float = 0.01
    t_end: float = 2.0
    dt_init: Optional[float] = None
    dt_growth: float = 1.01
    seed: str = "auto"

    def __post_init__(self):
        if self.n < 2:
            raise InvalidParameterError("solver needs n >= 2")
        if self.r_max <= 0.0:
            raise InvalidParameterError("r_max must be positive")
        if self.n_r < 200:
            raise InvalidParameterError("n_r must be >= 200")
        if not (0.0 < self.t_start < self.t_end):
            raise InvalidParameterError("need 0 < t_start < t_end")
        if self.dt_growth < 1.0:
            raise InvalidParameterError("dt_growth must be >= 1")
        if self.seed not in ("auto", "exact", "euclidean"):
            raise InvalidParameterError("seed must be auto, exact, or euclidean")
        if self.seed == "exact" and self.n != 3:
            raise InvalidParameterError("exact seed is only available for n = 3")

    @property
    def dt0(self) -> float:
        return self.dt_init if self.dt_init is not None else 0.01 * self.t_start


def refine(cfg: RadialSolverConfig) -> RadialSolverConfig:
    """Halve dr and dt everywhere (for convergence studies)."""
    return replace(cfg, n_r=cfg.n_r * 2, dt_init=0.5 * cfg.dt0,
                   dt_growth=1.0 + 0.5 * (cfg.dt_growth - 1.0))


def _seed_profile(cfg: RadialSolverConfig, r: np.ndarray) -> np.ndarray:
    mode = cfg.seed
    if mode == "auto":
        mode = "exact" if cfg.n == 3 else "euclidean"
    if mode == "exact":
        if cfg.n != 3:
            raise InvalidParameterError("exact seed is only available for n = 3")
        return np.asarray(_h3_u(r, cfg.t_start), dtype=float)
    t0 = cfg.t_start
    return (4.0 * math.pi * t0) ** (-0.5 * cfg.n) * np.exp(-r * r / (4.0 * t0))


def _drift_coefficients(n: int, r: np.ndarray) -> np.ndarray:
    return np.array([0.0] + [(n - 1) * coth(float(ri)) for ri in r[1:]])


def _cn_step(u, dr, dt, c, n):
    """One Crank-Nicolson step of u_t = u_rr + c(r) u_r; Dirichlet at r_max."""
    m = u.size
    lam = dt / (dr * dr)
    mu = dt / (2.0 * dr)
    lower = np.zeros(m)
    diag = np.zeros(m)
    upper = np.zeros(m)
    # symmetric origin: u_t(0) = n * u_rr(0) with ghost u[-1] = u[1]
    diag[0] = 2.0 * n * lam
    upper[0] = -2.0 * n * lam
    lower[1:m - 1] = -(lam - mu * c[1:m - 1])
    diag[1:m - 1] = 2.0 * lam
    upper[1:m - 1] = -(lam + mu * c[1:m - 1])
    # Dirichlet outer boundary
    diag[m - 1] = 0.0

    rhs = np.empty(m)
    rhs[0] = u[0] - 0.5 * (diag[0] * u[0] + upper[0] * u[1])
    interior = slice(1, m - 1)
    rhs[interior] = u[interior] - 0.5 * (
        lower[interior] * u[0:m - 2] + diag[interior] * u[interior] + upper[interior] * u[2:m])
    rhs[m - 1] = 0.0

    ab = np.zeros((3, m))
    ab[0, 1:] = 0.5 * upper[:-1]
    ab[1, :] = 1.0 + 0.5 * diag
    ab[2, :-1] = 0.5 * lower[1:]
    ab[1, m - 1] = 1.0
    ab[0, m - 1] = 0.0
    return solve_banded((1, 1), ab, rhs)


def radial_heat_solve(cfg: RadialSolverConfig) -> LogHeatData:
    """March the radial heat equation on H^n and package the log-derived data.

    Positivity is enforced step by step (a step producing negative values is
    retried with a halved dt); the result carries ``k = n - 1``, the exact
    Ricci lower-bound constant at curvature -1.
    """
    r = np.linspace(0.0, cfg.r_max, cfg.n_r + 1)
    dr = r[1] - r[0]
    c = _drift_coefficients(cfg.n, r)
    u = _seed_profile(cfg, r)
    u[-1] = 0.0
    if np.any(u < 0.0) or not np.all(np.isfinite(u)):
        raise SolverError("seed profile is not a finite nonnegative function")

    times = [cfg.t_start]
    profiles = [u.copy()]
    t = cfg.t_start
    dt = cfg.dt0
    while t < cfg.t_end - 1e-15 * cfg.t_end:
        step = min(dt, cfg.t_end - t)
        attempt = step
        for _ in range(60):
            u_new = _cn_step(u, dr, attempt, c, cfg.n)
            if np.all(np.isfinite(u_new)) and u_new.min() >= 0.0:
                break
            attempt *= 0.5
            if attempt < 1e-300:
                raise SolverError("step size underflow while preserving positivity")
        else:
            raise SolverError("could not take a positivity-preserving step")
        u = u_new
        t += attempt
        times.append(t)
        profiles.append(u.copy())
        dt = attempt * cfg.dt_growth

    t_arr = np.array(times)
    u_arr = np.vstack(profiles)
    label = (f"radial-solve(n={cfg.n},r_max={cfg.r_max},n_r={cfg.n_r},"
             f"t={cfg.t_start}..{cfg.t_end})")
    return _numeric_data(cfg.n, float(cfg.n - 1), r, t_arr, u_arr, label)


def _numeric_data(n, k, r, t_arr, u_arr, label) -> LogHeatData:
    """Derive f-quantities from a stored u(r, t) grid and wrap interpolators."""
    if t_arr.size < 4:
        raise SolverError("need at least 4 stored time levels")
    dr = float(r[1] - r[0])
    m, _ = u_arr.shape

    with np.errstate(divide="ignore", invalid="ignore"):
        inv_u = np.where(u_arr > 0.0, 1.0 / np.maximum(u_arr, 1e-300), np.nan)

        u_r = np.full_like(u_arr, np.nan)
        u_r[:, 1:-1] = (u_arr[:, 2:] - u_arr[:, :-2]) / (2.0 * dr)
        u_r[:, 0] = 0.0
        u_rr = np.full_like(u_arr, np.nan)
        u_rr[:, 1:-1] = (u_arr[:, 2:] - 2.0 * u_arr[:, 1:-1] + u_arr[:, :-2]) / (dr * dr)
        u_rr[:, 0] = 2.0 * (u_arr[:, 1] - u_arr[:, 0]) / (dr * dr)

        A = u_r * inv_u                      # f_r
        B = u_rr * inv_u                     # u_rr / u = f_rr + f_r^2
        grad = A * A
        cvec = np.array([0.0] + [coth(float(ri)) for ri in r[1:]])
        lap = B - grad + (n - 1) * cvec[None, :] * A
        lap[:, 0] = n * B[:, 0]              # radial symmetry at the pole

        # time derivative of log u by a 3-point nonuniform centered difference on u
        f_t = np.full_like(u_arr, np.nan)
        hm = (t_arr[1:-1] - t_arr[:-2])[:, None]
        hp = (t_arr[2:] - t_arr[1:-1])[:, None]
        num = (hm * hm * u_arr[2:, :] + (hp * hp - hm * hm) * u_arr[1:-1, :]
               - hp * hp * u_arr[:-2, :])
        f_t[1:-1, :] = num / (hp * hm * (hp + hm)) * inv_u[1:-1, :]

    # Trust the window only once the grid resolves the log-slope out to the
    # default verification radius r_max/2: the FD error of the log-derived
    # fields scales like (dr * f_r)^2, so the window opens when
    # |f_r(r_max/2, t)| * dr drops below 0.05 (a march seeded from a
    # concentrated profile has steep, still-forming tails before that).
    i_half = int(round(0.5 * (u_arr.shape[1] - 1)))
    t_lo = None
    for j in range(1, m - 1):
        slope = A[j, i_half]
        if u_arr[j, i_half] > 0.0 and math.isfinite(slope) and abs(slope) * dr <= 0.05:
            t_lo = max(float(t_arr[1]), 2.0 * float(t_arr[0]), float(t_arr[j]))
            break
    if t_lo is None:
        raise SolverError("far tail never resolved inside the run; extend t_end or refine dr")
    t_hi = float(t_arr[-2])
    if t_lo >= t_hi:
        raise SolverError(f"trusted window empty: ({t_lo}, {t_hi}); extend the run")

    # interpolate only where every field is defined: interior time rows
    # (the t-stencil needs both neighbors) and radii short of the Dirichlet edge
    ti = t_arr[1:-1]
    ri = r[:-1]
    cut = np.s_[1:-1, :-1]
    interp_grad = RegularGridInterpolator((ti, ri), grad[cut], bounds_error=True)
    interp_ft = RegularGridInterpolator((ti, ri), f_t[cut], bounds_error=True)
    interp_lap = RegularGridInterpolator((ti, ri), lap[cut], bounds_error=True)
    interp_u = RegularGridInterpolator((ti, ri), u_arr[cut], bounds_error=True)

    def _eval(interp, rq, t):
        rq = np.asarray(rq, dtype=float)
        pts = np.column_stack([np.full(rq.size, t), rq.ravel()])
        out = interp(pts)
        if np.any(~np.isfinite(out)):
            raise DomainError(f"{label}: solution too small for log-derivatives at t={t}")
        return float(out[0]) if rq.ndim == 0 else out.reshape(rq.shape)

    return LogHeatData(
        n=n, k=k, kind="numeric", r_max=float(ri[-1]), t_range=(t_lo, t_hi),
        grad_sq=lambda rq, t: _eval(interp_grad, rq, t),
        f_t=lambda rq, t: _eval(interp_ft, rq, t),
        laplacian=lambda rq, t: _eval(interp_lap, rq, t),
        u=lambda rq, t: _eval(interp_u, rq, t),
        label=label, r_grid=np.asarray(r), t_grid=t_arr, u_grid=u_arr,
    )


def heat_residual(data: LogHeatData, points) -> list[float]:
    """Residual ``lap f + |grad f|^2 - f_t`` at the given (r, t) points.

    The gate before verification runs: exact data must sit at machine zero,
    numeric data within discretization error relative to
    :meth:`LogHeatData.residual_scale`.
    """
    out = []
    for r_pt, t_pt in points:
        data.check_window(r_pt, t_pt)
        val = (float(data.laplacian(r_pt, t_pt)) + float(data.grad_sq(r_pt, t_pt))
               - float(data.f_t(r_pt, t_pt)))
        out.append(val)
    return out


# ---------------------------------------------------------------------------
# portable persistence (binary-free CSV)

def save_solution_csv(data: LogHeatData, path) -> None:
    """Write a numeric run as CSV: n/k header, r grid, t list, then u rows."""
    if data.kind != "numeric" or data.u_grid is None:
        raise InvalidParameterError("only numeric solver output can be persisted")
    lines = ["# gradest radial heat solution",
             f"n,{data.n}",
             f"k,{data.k!r}",
             "r," + ",".join(repr(float(x)) for x in data.r_grid),
             "t," + ",".join(repr(float(x)) for x in data.t_grid)]
    for i in range(data.r_grid.size):
        lines.append("u," + ",".join(repr(float(x)) for x in data.u_grid[:, i]))
    from .reporting import atomic_write_text
    atomic_write_text(path, "\n".join(lines) + "\n")


def load_solution_csv(path) -> LogHeatData:
    """Load a persisted run back; derived quantities are recomputed."""
    n = k = None
    r = t = None
    u_rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            tag, _, rest = line.partition(",")
            if tag == "n":
                n = int(rest)
            elif tag == "k":
                k = float(rest)
            elif tag == "r":
                r = np.array([float(x) for x in rest.split(",")])
            elif tag == "t":
                t = np.array([float(x) for x in rest.split(",")])
            elif tag == "u":
                u_rows.append([float(x) for x in rest.split(",")])
            else:
                raise TableFormatError(f"unknown row tag {tag!r} in {path}")
    if n is None or k is None or r is None or t is None or not u_rows:
        raise TableFormatError(f"{path} is missing required rows (n, k, r, t, u)")
    u_cols = np.array(u_rows)          # one row per r value, columns over t
    if u_cols.shape != (r.size, t.size):
        raise TableFormatError(
            f"u block has shape {u_cols.shape}, expected {(r.size, t.size)}")
    return _numeric_data(n, k, r, t, u_cols.T.copy(),
                         label=f"loaded({path})")
