import math

import numpy as np
import pytest

from gradest import (ConditionCheckError, EstimateContext, TimeFunction,
                     beta_from_b, check_suite, integrability_at_zero,
                     limit_at_zero, lixu_sinh_b, psi_from_b, qian_to_b,
                     quadratic_a, sinh_sq_a, theta_power_b)

CTX = EstimateContext(n=2, k=1.0, T=2.0)


@pytest.fixture(scope="module")
def theta_triplet():
    b = theta_power_b(0.5, 1.0, 2.0)
    beta = beta_from_b(CTX, b)
    psi = psi_from_b(CTX, b, beta)
    return b, beta, psi


class TestLimitAtZero:
    def test_linear_goes_to_zero(self):
        est = limit_at_zero(TimeFunction(fn=lambda t: t / 2, T=2.0))
        assert est.stable and est.value == pytest.approx(0.0, abs=1e-9)

    def test_generated_beta_goes_to_one(self, theta_triplet):
        _, beta, _ = theta_triplet
        est = limit_at_zero(beta)
        assert est.stable and est.value == pytest.approx(1.0, abs=1e-9)

    def test_oscillation_is_unstable(self):
        est = limit_at_zero(TimeFunction(fn=lambda t: math.sin(1 / t), T=2.0))
        assert not est.stable


class TestIntegrabilityAtZero:
    def test_inverse_sqrt_passes(self):
        v = integrability_at_zero(TimeFunction(fn=lambda s: s**-0.5, T=1.0), 1.0)
        assert v.passed and v.exponent == pytest.approx(-0.5, abs=1e-6)

    def test_inverse_fails(self):
        v = integrability_at_zero(TimeFunction(fn=lambda s: 1 / s, T=1.0), 1.0)
        assert not v.passed and v.exponent == pytest.approx(-1.0, abs=1e-6)

    def test_theta_09_exponent(self):
        b = theta_power_b(0.9, 1.0, 2.0)
        f = TimeFunction(fn=lambda s: b.deriv(s) ** 2 / b(s), T=2.0, vectorized=False)
        v = integrability_at_zero(f, 2.0)
        assert v.passed
        assert v.exponent == pytest.approx(2 / 0.9 - 3, abs=5e-3)

    def test_negative_integrand_is_an_error(self):
        with pytest.raises(ConditionCheckError):
            integrability_at_zero(TimeFunction(fn=lambda s: -1.0, T=1.0), 1.0)


class TestSuiteA:
    @pytest.mark.parametrize("a", [quadratic_a(2.0), sinh_sq_a(1.0, 2.0)])
    def test_admissible_a(self, a):
        rep = check_suite("A", {"a": a}, CTX)
        assert rep.passed, rep.to_table()

    def test_decreasing_a_fails_a1(self):
        bad = TimeFunction(fn=lambda t: 1.0 / (1.0 + t), T=2.0,
                           deriv=lambda t: -1.0 / (1.0 + t) ** 2)
        rep = check_suite("A", {"a": bad}, CTX)
        assert "A1" in rep.failed_labels()
        a1 = next(v for v in rep.verdicts if v.cid.label == "A1")
        assert a1.witness_t is not None


class TestSuiteC:
    @pytest.mark.parametrize("theta", [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9])
    def test_theta_family_admissible_iff_theta_below_one(self, theta):
        rep = check_suite("C", {"b": theta_power_b(theta, 1.0, 2.0)}, CTX)
        assert rep.passed, (theta, rep.to_table())

    @pytest.mark.parametrize("theta", [1.0, 1.2])
    def test_c2_fails_at_and_beyond_one(self, theta):
        rep = check_suite("C", {"b": theta_power_b(theta, 1.0, 2.0)}, CTX)
        assert "C2" in rep.failed_labels()
        c2 = next(v for v in rep.verdicts if v.cid.label == "C2")
        assert c2.witness_t is not None

    @pytest.mark.parametrize("bfn", [lixu_sinh_b(1.0, 2.0), qian_to_b(quadratic_a(2.0), 1.0)])
    def test_paper_style_coefficients(self, bfn):
        rep = check_suite("C", {"b": bfn}, CTX, delta=0.5)
        assert rep.passed, rep.to_table()

    def test_delta_scan_reports_choice(self):
        rep = check_suite("C", {"b": theta_power_b(0.5, 1.0, 2.0)}, CTX)
        c3 = next(v for v in rep.verdicts if v.cid.label == "C3")
        assert c3.verdict == "pass" and "delta=" in c3.note
        assert rep.params["delta"] == "scanned"


class TestSuitesBAndBPrime:
    def test_suite_b_with_sqrt_lambda(self, theta_triplet):
        b, beta, psi = theta_triplet
        lam = TimeFunction(fn=lambda t: math.sqrt(b(t)), T=2.0,
                           deriv=lambda t: b.deriv(t) / (2 * math.sqrt(b(t))),
                           label="sqrt(b)")
        rep = check_suite("B", {"lambda": lam, "beta": beta, "psi": psi}, CTX)
        assert rep.passed, rep.to_table()

    @pytest.mark.parametrize("make_b", [
        lambda: theta_power_b(0.5, 1.0, 2.0),
        lambda: lixu_sinh_b(1.0, 2.0),
    ])
    def test_suite_bprime_with_power_lambda(self, make_b):
        b = make_b()
        beta = beta_from_b(CTX, b)
        psi = psi_from_b(CTX, b, beta)
        delta = 0.5
        lam = TimeFunction(fn=lambda t: float(b(t)) ** (1 - delta), T=2.0,
                           vectorized=False, label="b^(1-delta)")
        rep = check_suite("B'", {"lambda": lam, "beta": beta, "psi": psi}, CTX)
        assert rep.passed, rep.to_table()
        b3 = next(v for v in rep.verdicts if v.cid.label == "B3'")
        assert "eps=" in b3.note

    def test_constant_beta_fails_balance(self):
        const_beta = TimeFunction(fn=lambda t: 0.5, T=2.0, deriv=lambda t: 0.0)
        lam = TimeFunction(fn=lambda t: t, T=2.0, deriv=lambda t: 1.0)
        # lyd psi does not satisfy the balance
        psi = TimeFunction(fn=lambda t: 2.0 / t + 1.0, T=2.0,
                           deriv=lambda t: -2.0 / t**2)
        rep = check_suite("B", {"lambda": lam, "beta": const_beta, "psi": psi}, CTX)
        assert "B5" in rep.failed_labels()

    def test_missing_function_is_an_error(self):
        with pytest.raises(ConditionCheckError):
            check_suite("B", {"beta": TimeFunction(fn=lambda t: 0.5, T=2.0)}, CTX)

    def test_unknown_suite(self):
        with pytest.raises(ConditionCheckError):
            check_suite("D", {}, CTX)


class TestReportRendering:
    def test_json_and_table_shapes(self, theta_triplet):
        b, _, _ = theta_triplet
        rep = check_suite("C", {"b": b}, CTX)
        js = rep.to_json()
        assert js["suite"] == "C" and js["passed"] is True
        assert [v["id"] for v in js["verdicts"]] == ["C1", "C2", "C3", "C4"]
        table = rep.to_table()
        assert table.splitlines()[0].startswith("condition")
        assert len(table.splitlines()) == 2 + 4
