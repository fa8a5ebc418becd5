"""Closed-form gradient-bound families in beta-form.

Every family is stored internally as the pair ``(beta(t), psi(t))`` of the
inequality ``beta * |grad f|^2 - f_t <= psi``; the alpha-form
``(alpha, phi) = (1/beta, psi/beta)`` is derived on demand.  Analytic time
derivatives are attached wherever the closed forms make them cheap, so the
ODE-residual checks get exact passthrough derivatives.

Families
--------
``lyd(beta)``
    Li-Yau-Davies: constant beta, ``psi = n/(2 beta t) + n k/(4(1-beta))``.
``hamilton``
    ``beta = exp(-2kt)``, ``psi = exp(2kt) * n/(2t)``.
``lixu-hyperbolic`` / ``lixu-linear``
    The time-dependent pairs with ``alpha = 1 + (sinh kt cosh kt - kt)/sinh^2 kt``
    and ``alpha = 1 + 2kt/3`` respectively.
``qian-theta(theta)``
    ``alpha = 1 + theta k t`` with the power-family phi, theta in (0, 1).
``improved-lyd(beta)``
    Constant beta with the sharper large-time psi, valid for
    ``t > (1-beta)/(k beta)``.
``cor18-case1/2/3``
    Constant-beta envelopes ``gamma n / t^p + n k/(4(1-beta))`` for
    ``p = 2, 1, theta``; each valid beyond its threshold time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

from .context import BoundSample, EstimateContext
from .errors import DomainError, InvalidParameterError
from .hyperbolic import alpha_ratio, alpha_ratio_slope, coth, csch2
from .timefunc import TimeFunction

__all__ = [
    "GradientBound",
    "make_family",
    "family_catalog",
    "convert_form",
    "convert_form_inverse",
    "improvement_threshold",
    "bound_from_json",
]

# canonical family ids and their ordered parameter names
_FAMILIES: dict[str, tuple[str, ...]] = {
    "lyd": ("beta",),
    "hamilton": (),
    "lixu-hyperbolic": (),
    "lixu-linear": (),
    "qian-theta": ("theta",),
    "improved-lyd": ("beta",),
    "cor18-case1": ("beta", "gamma"),
    "cor18-case2": ("beta", "gamma"),
    "cor18-case3": ("beta", "gamma", "theta"),
}

_ALIASES = {
    "lyd": "lyd",
    "hamilton": "hamilton",
    "lixuhyperbolic": "lixu-hyperbolic",
    "lixu-hyperbolic": "lixu-hyperbolic",
    "lixulinear": "lixu-linear",
    "lixu-linear": "lixu-linear",
    "qiantheta": "qian-theta",
    "qian-theta": "qian-theta",
    "improvedlyd": "improved-lyd",
    "improved-lyd": "improved-lyd",
    "cor18case1": "cor18-case1",
    "cor18-case1": "cor18-case1",
    "cor18case2": "cor18-case2",
    "cor18-case2": "cor18-case2",
    "cor18case3": "cor18-case3",
    "cor18-case3": "cor18-case3",
    "generatedfromb": "generated-from-b",
    "generated-from-b": "generated-from-b",
}


def canonical_family(name: str) -> str:
    key = name.strip().lower().replace("_", "-")
    try:
        return _ALIASES[key]
    except KeyError:
        raise InvalidParameterError(
            f"unknown family {name!r}; known: {sorted(set(_ALIASES.values()))}") from None


def family_catalog() -> dict[str, tuple[str, ...]]:
    """Built-in families and their ordered parameter names."""
    return dict(_FAMILIES)


@dataclass(frozen=True)
class GradientBound:
    """An evaluable gradient bound with its validity domain ``(t_min, T]``."""

    family: str
    params: dict
    ctx: EstimateContext
    t_min: float
    beta_of: Callable[[float], float] = field(repr=False)
    psi_of: Callable[[float], float] = field(repr=False)
    beta_slope: Optional[Callable[[float], float]] = field(default=None, repr=False)
    psi_slope: Optional[Callable[[float], float]] = field(default=None, repr=False)

    @property
    def id(self) -> str:
        parts = [self.family]
        order = _FAMILIES.get(self.family)
        if order:
            parts += [repr(float(self.params[p])) for p in order]
        elif self.params.get("label"):
            parts.append(str(self.params["label"]))
        return ":".join(parts)

    def _check_domain(self, t: float) -> None:
        if not (self.t_min < t <= self.ctx.T):
            raise DomainError(
                f"{self.id} is valid on ({self.t_min}, {self.ctx.T}], asked for t={t}")

    def evaluate(self, t: float) -> BoundSample:
        self._check_domain(t)
        return BoundSample(t=t, beta=float(self.beta_of(t)), psi=float(self.psi_of(t)))

    def formula_sample(self, t: float) -> BoundSample:
        """Evaluate the family formula past the horizon (asymptotic probes)."""
        if t <= self.t_min:
            raise DomainError(f"{self.id} formulas need t > {self.t_min}, asked for t={t}")
        return BoundSample(t=t, beta=float(self.beta_of(t)), psi=float(self.psi_of(t)))

    def beta_fn(self) -> TimeFunction:
        return TimeFunction(fn=self.beta_of, T=self.ctx.T, deriv=self.beta_slope,
                            vectorized=False, label=f"beta[{self.id}]")

    def psi_fn(self) -> TimeFunction:
        return TimeFunction(fn=self.psi_of, T=self.ctx.T, deriv=self.psi_slope,
                            vectorized=False, label=f"psi[{self.id}]")

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "params": {k: v for k, v in self.params.items()},
            "n": self.ctx.n,
            "k": self.ctx.k,
            "T": self.ctx.T,
        }


def _coerce_params(family: str, params) -> dict:
    order = _FAMILIES[family]
    if params is None:
        params = {}
    if isinstance(params, Mapping):
        given = dict(params)
    elif isinstance(params, Sequence) and not isinstance(params, (str, bytes)):
        if len(params) != len(order):
            raise InvalidParameterError(
                f"{family} takes parameters {order}, got {len(params)} values")
        given = dict(zip(order, params))
    else:
        raise InvalidParameterError(f"params must be a mapping or sequence, got {type(params)!r}")
    unknown = set(given) - set(order)
    if unknown:
        raise InvalidParameterError(f"{family} does not take parameters {sorted(unknown)}")
    missing = set(order) - set(given)
    if missing:
        raise InvalidParameterError(f"{family} is missing parameters {sorted(missing)}")
    return {k: float(given[k]) for k in order}


def _require_open_unit(value: float, name: str, family: str) -> None:
    if not (0.0 < value < 1.0):
        raise InvalidParameterError(f"{family}: {name} must lie in (0, 1), got {value}")


def make_family(ctx: EstimateContext, family: str, params=None) -> GradientBound:
    """Construct a built-in bound family for the given ambient data.

    Families whose formulas divide by ``k`` (qian-theta, improved-lyd and the
    three cor18 cases) reject ``k = 0`` at construction; the others accept
    ``k = 0`` through their continuous limits.
    """
    fam = canonical_family(family)
    if fam == "generated-from-b":
        raise InvalidParameterError(
            "generated-from-b bounds are built by coefficients.bound_from_b, not make_family")
    p = _coerce_params(fam, params)
    n, k, T = ctx.n, ctx.k, ctx.T

    if fam == "lyd":
        beta = p["beta"]
        _require_open_unit(beta, "beta", fam)
        const = n * k / (4.0 * (1.0 - beta))
        return GradientBound(
            fam, p, ctx, 0.0,
            beta_of=lambda t, b=beta: b,
            psi_of=lambda t: n / (2.0 * beta * t) + const,
            beta_slope=lambda t: 0.0,
            psi_slope=lambda t: -n / (2.0 * beta * t * t),
        )

    if fam == "hamilton":
        return GradientBound(
            fam, p, ctx, 0.0,
            beta_of=lambda t: math.exp(-2.0 * k * t),
            psi_of=lambda t: math.exp(2.0 * k * t) * n / (2.0 * t),
            beta_slope=lambda t: -2.0 * k * math.exp(-2.0 * k * t),
            psi_slope=lambda t: n * math.exp(2.0 * k * t) * (k / t - 1.0 / (2.0 * t * t)),
        )

    if fam == "lixu-hyperbolic":
        if k == 0.0:
            # continuous limit: alpha == 1, psi = n/(2t)
            return GradientBound(
                fam, p, ctx, 0.0,
                beta_of=lambda t: 1.0,
                psi_of=lambda t: n / (2.0 * t),
                beta_slope=lambda t: 0.0,
                psi_slope=lambda t: -n / (2.0 * t * t),
            )

        def alpha(t):
            return 1.0 + alpha_ratio(2.0 * k * t)

        def alpha_d(t):
            return 2.0 * k * alpha_ratio_slope(2.0 * k * t)

        def phi(t):
            return 0.5 * n * k * (coth(k * t) + 1.0)

        def phi_d(t):
            return -0.5 * n * k * k * csch2(k * t)

        return GradientBound(
            fam, p, ctx, 0.0,
            beta_of=lambda t: 1.0 / alpha(t),
            psi_of=lambda t: phi(t) / alpha(t),
            beta_slope=lambda t: -alpha_d(t) / alpha(t) ** 2,
            psi_slope=lambda t: phi_d(t) / alpha(t) - phi(t) * alpha_d(t) / alpha(t) ** 2,
        )

    if fam == "lixu-linear":
        def alpha(t):
            return 1.0 + (2.0 / 3.0) * k * t

        def phi(t):
            return n / (2.0 * t) + 0.5 * n * k + n * k * k * t / 6.0

        def phi_d(t):
            return -n / (2.0 * t * t) + n * k * k / 6.0

        a_d = 2.0 * k / 3.0
        return GradientBound(
            fam, p, ctx, 0.0,
            beta_of=lambda t: 1.0 / alpha(t),
            psi_of=lambda t: phi(t) / alpha(t),
            beta_slope=lambda t: -a_d / alpha(t) ** 2,
            psi_slope=lambda t: phi_d(t) / alpha(t) - phi(t) * a_d / alpha(t) ** 2,
        )

    if fam == "qian-theta":
        ctx.require_positive_k("qian-theta")
        theta = p["theta"]
        _require_open_unit(theta, "theta", fam)
        lead = (2.0 - theta) ** 2 * n / (16.0 * theta * (1.0 - theta))

        def alpha(t):
            return 1.0 + theta * k * t

        def phi(t):
            return lead / t + n * k * k * theta * t / 4.0 + 0.5 * n * k

        def phi_d(t):
            return -lead / (t * t) + n * k * k * theta / 4.0

        a_d = theta * k
        return GradientBound(
            fam, p, ctx, 0.0,
            beta_of=lambda t: 1.0 / alpha(t),
            psi_of=lambda t: phi(t) / alpha(t),
            beta_slope=lambda t: -a_d / alpha(t) ** 2,
            psi_slope=lambda t: phi_d(t) / alpha(t) - phi(t) * a_d / alpha(t) ** 2,
        )

    if fam == "improved-lyd":
        ctx.require_positive_k("improved-lyd")
        beta = p["beta"]
        _require_open_unit(beta, "beta", fam)
        c = (1.0 - beta) / (k * beta)
        if c >= T:
            raise InvalidParameterError(
                f"improved-lyd(beta={beta}) starts at t={c}, beyond the horizon T={T}")
        const = n * k / (4.0 * (1.0 - beta))
        lead = n * (1.0 - beta) / (16.0 * k)
        return GradientBound(
            fam, p, ctx, c,
            beta_of=lambda t, b=beta: b,
            psi_of=lambda t: lead / ((t - c) * t) + const,
            beta_slope=lambda t: 0.0,
            psi_slope=lambda t: -lead * (2.0 * t - c) / ((t - c) * t) ** 2,
        )

    if fam in ("cor18-case1", "cor18-case2", "cor18-case3"):
        ctx.require_positive_k(fam)
        beta, gamma = p["beta"], p["gamma"]
        _require_open_unit(beta, "beta", fam)
        const = n * k / (4.0 * (1.0 - beta))
        c = (1.0 - beta) / (k * beta)

        if fam == "cor18-case1":
            floor_gamma = (1.0 - beta) / (16.0 * k)
            if gamma <= floor_gamma:
                raise InvalidParameterError(
                    f"cor18-case1 needs gamma > (1-beta)/(16k) = {floor_gamma}, got {gamma}")
            t_min = gamma * (1.0 - beta) / (k * beta * (gamma - floor_gamma))
            power = 2.0
        elif fam == "cor18-case2":
            if gamma <= 0.0:
                raise InvalidParameterError(f"cor18-case2 needs gamma > 0, got {gamma}")
            t_min = (1.0 - beta) / (16.0 * k * gamma) + c
            power = 1.0
        else:
            theta = p["theta"]
            if gamma <= 0.0:
                raise InvalidParameterError(f"cor18-case3 needs gamma > 0, got {gamma}")
            if not (1.0 < theta < 2.0):
                raise InvalidParameterError(f"cor18-case3 needs theta in (1, 2), got {theta}")
            t_min = _case3_threshold(n, k, beta, gamma, theta)
            power = theta

        if t_min >= T:
            raise InvalidParameterError(
                f"{fam}{tuple(p.values())} starts at t={t_min}, beyond the horizon T={T}")
        return GradientBound(
            fam, p, ctx, t_min,
            beta_of=lambda t, b=beta: b,
            psi_of=lambda t: gamma * n / t ** power + const,
            beta_slope=lambda t: 0.0,
            psi_slope=lambda t: -power * gamma * n / t ** (power + 1.0),
        )

    raise InvalidParameterError(f"unhandled family {fam!r}")  # pragma: no cover


def _case3_threshold(n, k, beta, gamma, theta):
    """Smallest time beyond which the improved-lyd psi stays below the t^-theta envelope.

    The envelope comparison reduces to ``h(t) = (1-beta) t^(theta-1) /
    (16 k (t - c)) - gamma`` with ``c = (1-beta)/(k beta)``; ``h`` is strictly
    decreasing from +inf on ``(c, inf)``, so bisection is well posed.
    """
    c = (1.0 - beta) / (k * beta)

    def h(t):
        return (1.0 - beta) * t ** (theta - 1.0) / (16.0 * k * (t - c)) - gamma

    lo = c * (1.0 + 1e-12)
    hi = 1e6 / k
    if h(hi) > 0.0:
        raise InvalidParameterError(
            f"cor18-case3 threshold exceeds the search range (gamma={gamma} too small)")
    while h(lo) < 0.0:
        # floating-point edge: move the left end closer to the pole
        lo = c + (lo - c) * 0.5
        if lo - c < 1e-300:
            raise InvalidParameterError("cor18-case3 threshold search failed near the pole")
    while (hi - lo) > 1e-14 * hi:
        mid = 0.5 * (lo + hi)
        if h(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def convert_form(alpha: TimeFunction, phi: TimeFunction) -> tuple[TimeFunction, TimeFunction]:
    """Alpha-form to beta-form: ``beta = 1/alpha``, ``psi = phi/alpha``.

    Raises :class:`DomainError` if ``alpha`` dips below 1 at an evaluated
    point.  Analytic derivatives propagate when both inputs carry them.
    """

    def checked_alpha(t):
        a = float(alpha(t))
        if a < 1.0 - 1e-12:
            raise DomainError(f"alpha(t) must be >= 1; alpha({t}) = {a}")
        return a

    def beta(t):
        return 1.0 / checked_alpha(t)

    def psi(t):
        return float(phi(t)) / checked_alpha(t)

    beta_d = psi_d = None
    if alpha.deriv is not None:
        def beta_d(t):  # noqa: F811 - conditional definition
            return -float(alpha.deriv(t)) / checked_alpha(t) ** 2
        if phi.deriv is not None:
            def psi_d(t):  # noqa: F811
                a = checked_alpha(t)
                return float(phi.deriv(t)) / a - float(phi(t)) * float(alpha.deriv(t)) / a ** 2

    T = min(alpha.T, phi.T)
    return (
        TimeFunction(fn=beta, T=T, deriv=beta_d, vectorized=False, label=f"1/({alpha.label})"),
        TimeFunction(fn=psi, T=T, deriv=psi_d, vectorized=False, label=f"({phi.label})/({alpha.label})"),
    )


def convert_form_inverse(beta: TimeFunction, psi: TimeFunction) -> tuple[TimeFunction, TimeFunction]:
    """Beta-form back to alpha-form: ``alpha = 1/beta``, ``phi = psi/beta``."""

    def checked_beta(t):
        b = float(beta(t))
        if not (0.0 < b <= 1.0 + 1e-12):
            raise DomainError(f"beta(t) must lie in (0, 1]; beta({t}) = {b}")
        return b

    T = min(beta.T, psi.T)
    return (
        TimeFunction(fn=lambda t: 1.0 / checked_beta(t), T=T, vectorized=False,
                     label=f"1/({beta.label})"),
        TimeFunction(fn=lambda t: float(psi(t)) / checked_beta(t), T=T, vectorized=False,
                     label=f"({psi.label})/({beta.label})"),
    )


def improvement_threshold(ctx: EstimateContext, beta: float) -> float:
    """Time beyond which improved-lyd(beta) is strictly below lyd(beta).

    Closed form: ``(1-beta)/(k beta) + beta (1-beta)/(8k)``.
    """
    ctx.require_positive_k("improvement threshold")
    _require_open_unit(beta, "beta", "improvement threshold")
    return (1.0 - beta) / (ctx.k * beta) + beta * (1.0 - beta) / (8.0 * ctx.k)


def bound_from_json(payload: Mapping) -> GradientBound:
    """Rebuild a closed-form bound from its JSON object {family, params, n, k, T}."""
    try:
        ctx = EstimateContext(n=int(payload["n"]), k=float(payload["k"]), T=float(payload["T"]))
        return make_family(ctx, payload["family"], payload.get("params") or {})
    except KeyError as exc:
        raise InvalidParameterError(f"bound JSON is missing key {exc}") from None
