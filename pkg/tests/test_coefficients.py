import math

import numpy as np
import pytest

from gradest import (ConditionCheckError, DomainError, EstimateContext,
                     InvalidParameterError, TimeFunction, b5_residual,
                     beta_from_b, bound_from_b, coefficient_preset,
                     differentiate, lixu_sinh_b, logderiv_identity_residual,
                     ode_psi_solve, psi_from_b, qian_to_b, quadratic_a,
                     sinh_sq_a, theta_power_b)

CTX = EstimateContext(n=2, k=1.0, T=5.0)
GRID = np.geomspace(1e-3, 5.0, 30)


@pytest.fixture(scope="module")
def theta_half_pair():
    b = theta_power_b(0.5, CTX.k, CTX.T)
    beta = beta_from_b(CTX, b)
    psi = psi_from_b(CTX, b, beta)
    return b, beta, psi


@pytest.fixture(scope="module")
def sinh_pair():
    b = lixu_sinh_b(CTX.k, CTX.T)
    beta = beta_from_b(CTX, b)
    psi = psi_from_b(CTX, b, beta)
    return b, beta, psi


class TestPresets:
    def test_sinh_matches_three_term_form(self):
        b = lixu_sinh_b(1.0, 5.0)
        for t in (0.5, 1.0, 3.0):
            direct = math.sinh(t) ** 2 + math.sinh(t) * math.cosh(t) - t
            assert b(t) == pytest.approx(direct, rel=1e-14)

    def test_sinh_small_argument_no_cancellation(self):
        b = lixu_sinh_b(1.0, 5.0)
        t = 1e-12
        assert b(t) == pytest.approx(t * t, rel=1e-10)   # b ~ k^2 t^2
        assert b.deriv(t) == pytest.approx(2 * t, rel=1e-10)

    def test_theta_power_rejects_bad_theta(self):
        with pytest.raises(InvalidParameterError):
            theta_power_b(0.0, 1.0, 5.0)

    def test_preset_registry(self):
        b = coefficient_preset("theta-power", k=1.0, T=5.0, theta=0.5)
        assert b(1.0) == pytest.approx(1.5 * 1.0)
        with pytest.raises(InvalidParameterError):
            coefficient_preset("theta-power", k=1.0, T=5.0)
        with pytest.raises(InvalidParameterError):
            coefficient_preset("unknown", k=1.0, T=5.0)


class TestQianTransform:
    def test_quadratic_a_gives_cubic_correction(self):
        b = qian_to_b(quadratic_a(5.0), 1.0)
        for t in (0.3, 1.0, 2.5):
            assert b(t) == pytest.approx(t**2 + (2 / 3) * t**3, rel=1e-11)
        assert b.deriv(1.0) == pytest.approx(2.0 + 2.0, rel=1e-12)   # a' + 2 k a

    def test_sinh_sq_a_reproduces_sinh_coefficient(self):
        # oracle: int sinh^2(ks) ds = sinh(kt)cosh(kt)/(2k) - t/2
        b = qian_to_b(sinh_sq_a(1.0, 5.0), 1.0)
        ref = lixu_sinh_b(1.0, 5.0)
        for t in (0.2, 1.0, 3.0):
            assert b(t) == pytest.approx(ref(t), rel=1e-10)

    def test_beta_matches_a_form(self):
        # beta = 1/(1 + (2k/a) int a) for b = a + 2k int a
        a = quadratic_a(5.0)
        b = qian_to_b(a, 1.0)
        beta = beta_from_b(CTX, b)
        for t in (0.1, 1.0, 4.0):
            expected = 1.0 / (1.0 + (2.0 / t**2) * (t**3 / 3.0))
            assert beta(t) == pytest.approx(expected, rel=1e-8)


class TestBetaFromB:
    def test_matches_closed_theta_form(self, theta_half_pair):
        _, beta, _ = theta_half_pair
        for t in GRID:
            assert beta(float(t)) == pytest.approx(1 / (1 + 0.5 * t), rel=1e-8)

    def test_sinh_coefficient_matches_hyperbolic_alpha(self, sinh_pair):
        _, beta, _ = sinh_pair
        for t in (0.1, 0.7, 2.0):
            alpha = 1 + (math.sinh(t) * math.cosh(t) - t) / math.sinh(t) ** 2
            assert beta(t) == pytest.approx(1 / alpha, rel=1e-8)

    def test_lower_envelope(self, theta_half_pair):
        _, beta, _ = theta_half_pair
        for t in GRID:
            assert beta(float(t)) >= 1 - 2 * CTX.k * float(t) - 1e-12

    def test_range(self, theta_half_pair):
        _, beta, _ = theta_half_pair
        for t in GRID:
            assert 0.0 < beta(float(t)) < 1.0

    def test_requires_positive_k(self):
        ctx0 = EstimateContext(n=2, k=0.0, T=5.0)
        with pytest.raises(InvalidParameterError):
            beta_from_b(ctx0, theta_power_b(0.5, 0.0, 5.0))

    def test_overflow_guard(self):
        big = EstimateContext(n=2, k=100.0, T=5.0)
        with pytest.raises(InvalidParameterError):
            beta_from_b(big, theta_power_b(0.5, 100.0, 5.0))


class TestPsiFromB:
    def test_matches_closed_theta_psi(self, theta_half_pair):
        # oracle: hand integration of b'^2 (1+theta k s)/b = s^(2/theta-3)((2-theta)/theta + 2ks)^2
        _, _, psi = theta_half_pair
        theta, k, n = 0.5, 1.0, 2
        for t in GRID:
            t = float(t)
            phi = (2 - theta) ** 2 * n / (16 * theta * (1 - theta) * t) \
                + n * k**2 * theta * t / 4 + n * k / 2
            assert psi(t) == pytest.approx(phi / (1 + theta * k * t), rel=1e-6)

    def test_positive(self, theta_half_pair):
        _, _, psi = theta_half_pair
        assert all(psi(float(t)) > 0 for t in GRID)

    def test_small_time_leading_term(self, sinh_pair):
        # for the sinh coefficient t*psi -> n/2
        _, _, psi = sinh_pair
        t = 1e-7
        assert t * psi(t) == pytest.approx(CTX.n / 2, rel=1e-5)


class TestIdentityResiduals:
    def test_theta_family_identity(self, theta_half_pair):
        b, beta, _ = theta_half_pair
        for t in (0.05, 0.3, 1.0, 4.0):
            r = logderiv_identity_residual(CTX, b, beta, t)
            scale = max(1.0, abs(b.deriv(t) / b(t)))
            assert abs(r) <= 1e-5 * scale

    def test_qian_cubic_identity(self):
        b = qian_to_b(quadratic_a(5.0), 1.0)
        beta = beta_from_b(CTX, b)
        for t in (0.05, 0.5, 2.0):
            r = logderiv_identity_residual(CTX, b, beta, t)
            assert abs(r) <= 1e-5 * max(1.0, abs(b.deriv(t) / b(t)))

    def test_unrelated_beta_leaves_residual(self, theta_half_pair):
        b, _, _ = theta_half_pair
        const = TimeFunction(fn=lambda t: 0.5, T=5.0, deriv=lambda t: 0.0)
        # (2k*0.5)/0.5 = 2k = 2 versus b'/b = 7/1.5 at t=1
        assert abs(logderiv_identity_residual(CTX, b, const, 1.0)) > 1.0


class TestBalanceResidual:
    @pytest.mark.parametrize("fam,params", [
        ("qian-theta", {"theta": 0.5}), ("lixu-hyperbolic", None), ("lixu-linear", None)])
    def test_generator_constructible_families_satisfy_it(self, fam, params):
        from gradest import make_family
        bd = make_family(CTX, fam, params)
        beta, psi = bd.beta_fn(), bd.psi_fn()
        for t in np.geomspace(0.1, 5.0, 25):
            res = b5_residual(CTX, beta, psi, float(t))
            assert abs(res) <= 1e-4 * (1 + abs(differentiate(psi, float(t))))

    def test_generated_pair_satisfies_it(self, theta_half_pair):
        _, beta, psi = theta_half_pair
        for t in np.geomspace(1e-3, 5.0, 25):
            res = b5_residual(CTX, beta, psi, float(t))
            assert abs(res) <= 1e-4 * (1 + abs(differentiate(psi, float(t))))

    def test_additive_perturbation_shifts_by_coefficient(self, theta_half_pair):
        _, beta, psi = theta_half_pair
        shifted = TimeFunction(fn=lambda t: psi(t) + 1.0, T=5.0, vectorized=False)
        t = 1.0
        delta = b5_residual(CTX, beta, shifted, t) - b5_residual(CTX, beta, psi, t)
        coeff = (2 * CTX.k * beta(t) + differentiate(beta, t)) / (1 - beta(t))
        assert delta == pytest.approx(coeff, rel=1e-6)
        assert delta > 0

    def test_beta_at_one_is_singular(self):
        one = TimeFunction(fn=lambda t: 1.0, T=5.0, deriv=lambda t: 0.0)
        with pytest.raises(DomainError):
            b5_residual(CTX, one, one, 1.0)


class TestOdePath:
    def test_constant_beta_closed_solution(self):
        beta = TimeFunction(fn=lambda t: 0.5, T=5.0, deriv=lambda t: 0.0)
        c = 2 * CTX.k * 0.5 / 0.5
        psi_inf = CTX.n * CTX.k / (4 * 0.5)
        sol = ode_psi_solve(CTX, beta, 0.5, 5.0, 3.0)
        for t in (1.0, 2.0, 3.0):
            exact = (5.0 - psi_inf) * math.exp(-c * (t - 0.5)) + psi_inf
            assert sol(t) == pytest.approx(exact, rel=1e-8)

    def test_equilibrium_is_a_fixed_point(self):
        beta = TimeFunction(fn=lambda t: 0.5, T=5.0, deriv=lambda t: 0.0)
        psi_inf = CTX.n * CTX.k / (4 * 0.5)
        sol = ode_psi_solve(CTX, beta, 0.5, psi_inf, 3.0)
        assert sol(2.7) == pytest.approx(psi_inf, rel=1e-9)

    def test_agrees_with_quadrature_route(self, theta_half_pair):
        from gradest import make_family
        _, _, psi = theta_half_pair
        closed_beta = make_family(CTX, "qian-theta", {"theta": 0.5}).beta_fn()
        sol = ode_psi_solve(CTX, closed_beta, 0.05, psi(0.05), 2.0)
        assert sol(2.0) == pytest.approx(psi(2.0), rel=1e-6)

    def test_bad_interval(self):
        beta = TimeFunction(fn=lambda t: 0.5, T=5.0, deriv=lambda t: 0.0)
        with pytest.raises(InvalidParameterError):
            ode_psi_solve(CTX, beta, 2.0, 1.0, 1.0)

    def test_solution_domain(self):
        beta = TimeFunction(fn=lambda t: 0.5, T=5.0, deriv=lambda t: 0.0)
        sol = ode_psi_solve(CTX, beta, 0.5, 1.0, 2.0)
        with pytest.raises(DomainError):
            sol(3.0)


class TestBoundFromB:
    def test_matches_closed_family(self):
        from gradest import make_family
        bd = bound_from_b(CTX, theta_power_b(0.5, CTX.k, CTX.T))
        closed = make_family(CTX, "qian-theta", {"theta": 0.5})
        for t in (0.01, 0.5, 3.0):
            assert bd.evaluate(t).psi == pytest.approx(closed.evaluate(t).psi, rel=1e-6)
            assert bd.evaluate(t).beta == pytest.approx(closed.evaluate(t).beta, rel=1e-8)
        assert bd.family == "generated-from-b"
        assert bd.t_min == 0.0

    def test_inadmissible_coefficient_rejected(self):
        with pytest.raises(ConditionCheckError):
            bound_from_b(CTX, theta_power_b(1.0, CTX.k, CTX.T))
