"""Generate (beta, psi) pairs from a coefficient function b(t).

Given ``b`` with ``b -> 0`` at zero, ``b' > 0``, and ``b'^2/b`` integrable,
the generator produces

    beta(t) = 1 - (2k / (b(t) e^{2kt})) * int_0^t b(s) e^{2ks} ds
    psi(t)  = (n / (8 b(t))) * int_0^t (b'^2 / (b beta))(s) ds

which always satisfy the first-order balance

    psi' + ((2k beta + beta')/(1 - beta)) psi
         = n (2k beta + beta')^2 / (8 beta (1 - beta)^2)

together with the log-derivative identity
``(2k beta + beta')/(1 - beta) = (ln b)'``.  Residuals of both are exposed
as checkable quantities, and the balance can be integrated forward as an
ODE to cross-validate the quadrature path.

The two classical coefficient choices are provided as presets, along with
the transform ``b = a + 2k int_0^t a`` that maps the older ``a``-family
into this one.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import solve_ivp

from .context import EstimateContext
from .errors import DomainError, InvalidParameterError, SolverError
from .families import GradientBound
from .quadrature import CumulativeIntegral, QuadratureSpec
from .timefunc import TimeFunction, differentiate

__all__ = [
    "theta_power_b",
    "lixu_sinh_b",
    "quadratic_a",
    "sinh_sq_a",
    "theta_power_a",
    "qian_to_b",
    "beta_from_b",
    "psi_from_b",
    "bound_from_b",
    "logderiv_identity_residual",
    "b5_residual",
    "ode_psi_solve",
    "coefficient_preset",
]

_EXP_ARG_LIMIT = 700.0  # exp() overflow guard for the e^{2kt} weighting


# ---------------------------------------------------------------------------
# coefficient presets

def theta_power_b(theta: float, k: float, T: float) -> TimeFunction:
    """b(t) = (1 + theta k t) t^(2/theta - 1); admissible iff theta in (0, 1)."""
    if theta <= 0.0 or theta >= 2.0:
        raise InvalidParameterError(f"theta-power coefficient needs theta in (0, 2), got {theta}")
    p = 2.0 / theta - 1.0

    def value(t):
        return (1.0 + theta * k * t) * t ** p

    def slope(t):
        return theta * k * t ** p + (1.0 + theta * k * t) * p * t ** (p - 1.0)

    return TimeFunction(fn=value, T=T, deriv=slope, zero_limit=0.0, power=p,
                        label=f"theta-power(theta={theta},k={k})")


def lixu_sinh_b(k: float, T: float) -> TimeFunction:
    """b(t) = sinh^2(kt) + sinh(kt)cosh(kt) - kt, computed as expm1(2kt)/2 - kt.

    The expm1 form is exact algebra; below x = 2kt = 0.02 even it cancels
    catastrophically (b ~ x^2/4 built from O(x) terms), so a truncated
    series takes over there.  The derivative collapses to ``k * expm1(2kt)``,
    which is cancellation-free as is.
    """

    def value(t):
        x = 2.0 * k * np.asarray(t, dtype=float)
        series = (x * x / 4.0) * (1.0 + x / 3.0 + x * x / 12.0 + x**3 / 60.0
                                  + x**4 / 360.0 + x**5 / 2520.0 + x**6 / 20160.0)
        direct = 0.5 * np.expm1(np.minimum(x, 710.0)) - x / 2.0
        out = np.where(x < 0.02, series, direct)
        return float(out) if np.ndim(t) == 0 else out

    def slope(t):
        return k * np.expm1(2.0 * k * np.asarray(t, dtype=float))

    return TimeFunction(fn=value, T=T, deriv=slope, zero_limit=0.0, power=2.0,
                        label=f"lixu-sinh(k={k})")


def quadratic_a(T: float) -> TimeFunction:
    return TimeFunction(fn=lambda t: t * t, T=T, deriv=lambda t: 2.0 * t,
                        zero_limit=0.0, power=2.0, label="a=t^2")


def sinh_sq_a(k: float, T: float) -> TimeFunction:
    return TimeFunction(fn=lambda t: np.sinh(k * t) ** 2, T=T,
                        deriv=lambda t: k * np.sinh(2.0 * k * t),
                        zero_limit=0.0, power=2.0, label=f"a=sinh^2({k}t)")


def theta_power_a(theta: float, T: float) -> TimeFunction:
    """a(t) = t^(2/theta - 1), the generating a for the theta family."""
    if theta <= 0.0 or theta >= 2.0:
        raise InvalidParameterError(f"theta-power a needs theta in (0, 2), got {theta}")
    p = 2.0 / theta - 1.0
    return TimeFunction(fn=lambda t: t ** p, T=T, deriv=lambda t: p * t ** (p - 1.0),
                        zero_limit=0.0, power=p, label=f"a=t^{p}")


def qian_to_b(a: TimeFunction, k: float, spec: QuadratureSpec | None = None) -> TimeFunction:
    """Transform a(t) into b(t) = a(t) + 2k int_0^t a(s) ds.

    The integral is taken by endpoint-safe quadrature; the derivative
    ``b' = a' + 2 k a`` is attached analytically whenever ``a`` carries one.
    """
    if k < 0.0:
        raise InvalidParameterError("qian_to_b needs k >= 0")
    cum = CumulativeIntegral(a, a.T, spec)

    def value(t):
        return float(a(t)) + 2.0 * k * cum.value(t)

    slope = None
    if a.deriv is not None:
        def slope(t):  # noqa: F811
            return float(a.deriv(t)) + 2.0 * k * float(a(t))

    return TimeFunction(fn=value, T=a.T, deriv=slope, zero_limit=0.0, power=a.power,
                        vectorized=False, label=f"qian[{a.label},k={k}]")


def coefficient_preset(name: str, *, k: float, T: float, theta: float | None = None,
                       a: str | None = None) -> TimeFunction:
    """Named coefficient presets used by the CLI: theta-power, lixu-sinh, qian-from-a."""
    key = name.strip().lower()
    if key == "theta-power":
        if theta is None:
            raise InvalidParameterError("theta-power preset needs --theta")
        return theta_power_b(theta, k, T)
    if key == "lixu-sinh":
        return lixu_sinh_b(k, T)
    if key == "qian-from-a":
        if a == "t2" or a is None:
            return qian_to_b(quadratic_a(T), k)
        if a == "sinh2":
            return qian_to_b(sinh_sq_a(k, T), k)
        raise InvalidParameterError(f"qian-from-a supports a in {{t2, sinh2}}, got {a!r}")
    raise InvalidParameterError(f"unknown coefficient preset {name!r}")


# ---------------------------------------------------------------------------
# the generator

def _weighted(b: TimeFunction, k: float) -> TimeFunction:
    return TimeFunction(fn=lambda s: b.fn(s) * np.exp(2.0 * k * s), T=b.T,
                        power=b.power, vectorized=b.vectorized,
                        label=f"({b.label})*e^(2ks)")


def beta_from_b(ctx: EstimateContext, b: TimeFunction,
                spec: QuadratureSpec | None = None) -> TimeFunction:
    """beta(t) = 1 - (2k/(b e^{2kt})) int_0^t b e^{2ks} ds.

    Lies in (0, 1) on (0, T] for admissible b and obeys beta >= 1 - 2kt.
    """
    ctx.require_positive_k("beta_from_b")
    k, T = ctx.k, ctx.T
    if 2.0 * k * T > _EXP_ARG_LIMIT:
        raise InvalidParameterError(
            f"k*T = {k * T} too large for the e^(2kt) weighting (needs 2kT <= {_EXP_ARG_LIMIT})")
    cum = CumulativeIntegral(_weighted(b, k), T, spec, bottom_exponent=-84)

    def beta(t):
        bt = float(b(t))
        if bt <= 0.0:
            raise DomainError(f"coefficient b must be positive on (0, T]; b({t}) = {bt}")
        return 1.0 - 2.0 * k * cum.value(t) * math.exp(-2.0 * k * t) / bt

    return TimeFunction(fn=beta, T=T, zero_limit=1.0, vectorized=False,
                        label=f"beta[{b.label}]")


def psi_from_b(ctx: EstimateContext, b: TimeFunction, beta: TimeFunction | None = None,
               spec: QuadratureSpec | None = None) -> TimeFunction:
    """psi(t) = (n/(8 b(t))) int_0^t (b'^2/(b beta))(s) ds, positive on (0, T]."""
    ctx.require_positive_k("psi_from_b")
    if beta is None:
        beta = beta_from_b(ctx, b, spec)
    n, T = ctx.n, ctx.T

    def integrand(s):
        s = float(s)
        bs = float(b(s))
        if bs <= 0.0:
            raise DomainError(f"coefficient b must be positive on (0, T]; b({s}) = {bs}")
        bp = float(b.deriv(s)) if b.deriv is not None else differentiate(b, s)
        return bp * bp / (bs * float(beta(s)))

    f = TimeFunction(fn=integrand, T=T, vectorized=False,
                     power=(b.power - 2.0 if b.power is not None else None),
                     label=f"b'^2/(b*beta)[{b.label}]")
    cum = CumulativeIntegral(f, T, spec)

    def psi(t):
        return n / (8.0 * float(b(t))) * cum.value(t)

    return TimeFunction(fn=psi, T=T, vectorized=False, label=f"psi[{b.label}]")


def bound_from_b(ctx: EstimateContext, b: TimeFunction, check: bool = True,
                 spec: QuadratureSpec | None = None) -> GradientBound:
    """Package the generated (beta, psi) as an evaluable bound on (0, T].

    With ``check=True`` the admissibility of ``b`` (vanishing limit, positive
    slope, integrable b'^2/b) is audited first and a failed audit raises
    :class:`~gradest.errors.ConditionCheckError`.
    """
    ctx.require_positive_k("bound_from_b")
    if check:
        from .conditions import require_generator_conditions
        require_generator_conditions(b, ctx, spec)
    beta = beta_from_b(ctx, b, spec)
    psi = psi_from_b(ctx, b, beta, spec)
    return GradientBound(
        family="generated-from-b",
        params={"label": b.label or "custom"},
        ctx=ctx,
        t_min=0.0,
        beta_of=beta.fn,
        psi_of=psi.fn,
    )


# ---------------------------------------------------------------------------
# identity and balance residuals

def _balance_pieces(ctx: EstimateContext, beta: TimeFunction, t: float):
    bt = float(beta(t))
    if not (0.0 < bt < 1.0):
        raise DomainError(f"balance residuals need beta in (0, 1); beta({t}) = {bt}")
    bp = differentiate(beta, t)
    m = 2.0 * ctx.k * bt + bp
    coeff = m / (1.0 - bt)
    source = ctx.n * m * m / (8.0 * bt * (1.0 - bt) ** 2)
    return coeff, source


def logderiv_identity_residual(ctx: EstimateContext, b: TimeFunction,
                               beta: TimeFunction, t: float) -> float:
    """(2k beta + beta')/(1 - beta) - (ln b)' at ``t``.

    Vanishes (up to differentiation error) exactly when ``beta`` was
    generated from ``b``; an unrelated beta leaves a visible residual.
    """
    coeff, _ = _balance_pieces(ctx, beta, t)
    bp = float(b.deriv(t)) if b.deriv is not None else differentiate(b, t)
    return coeff - bp / float(b(t))


def b5_residual(ctx: EstimateContext, beta: TimeFunction, psi: TimeFunction, t: float) -> float:
    """Residual of the first-order balance that tight bound pairs satisfy.

    Returns ``psi' + ((2k beta + beta')/(1-beta)) psi
    - n (2k beta + beta')^2 / (8 beta (1-beta)^2)``.
    """
    coeff, source = _balance_pieces(ctx, beta, t)
    return differentiate(psi, t) + coeff * float(psi(t)) - source


def ode_psi_solve(ctx: EstimateContext, beta: TimeFunction, t0: float, psi0: float,
                  t1: float, rtol: float = 1e-10) -> TimeFunction:
    """Integrate the balance forward from ``psi(t0) = psi0`` up to ``t1``.

    Uses an adaptive embedded 4th/5th-order pair at local tolerance
    ``rtol``; the result agrees with the quadrature route whenever the seed
    comes from it.  Raises :class:`SolverError` if beta leaves (0, 1) or the
    step size underflows.
    """
    if not (0.0 < t0 < t1 <= min(ctx.T, beta.T)):
        raise InvalidParameterError(f"need 0 < t0 < t1 <= T; got t0={t0}, t1={t1}, T={ctx.T}")

    def rhs(t, y):
        bt = float(beta(t))
        if not (0.0 < bt < 1.0):
            raise SolverError(f"beta left (0, 1) during integration: beta({t}) = {bt}")
        bp = differentiate(beta, t)
        m = 2.0 * ctx.k * bt + bp
        coeff = m / (1.0 - bt)
        source = ctx.n * m * m / (8.0 * bt * (1.0 - bt) ** 2)
        return (source - coeff * y[0],)

    sol = solve_ivp(rhs, (t0, t1), (float(psi0),), method="RK45",
                    rtol=rtol, atol=1e-12, dense_output=True)
    if not sol.success:
        raise SolverError(f"balance ODE integration failed: {sol.message}")

    def fn(t):
        if not (t0 <= t <= t1):
            raise DomainError(f"ODE solution defined on [{t0}, {t1}], asked for t={t}")
        return float(sol.sol(t)[0])

    return TimeFunction(fn=fn, T=t1, vectorized=False, label=f"psi-ode[{beta.label}]")
