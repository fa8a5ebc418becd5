import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gradest import (CumulativeIntegral, QuadratureSpec, TimeFunction,
                     InvalidParameterError, QuadratureNonConvergenceError,
                     integrate_from_zero)


def tf(fn, T=1.0, **kw):
    return TimeFunction(fn=fn, T=T, **kw)


class TestIntegrateFromZero:
    def test_polynomial(self):
        assert integrate_from_zero(tf(lambda s: s**2), 1.0) == pytest.approx(1 / 3, abs=1e-10)

    def test_inverse_sqrt_singularity(self):
        val = integrate_from_zero(tf(lambda s: 1 / np.sqrt(s)), 1.0)
        assert val == pytest.approx(2.0, abs=1e-8)

    def test_divergent_integrand_raises(self):
        with pytest.raises(QuadratureNonConvergenceError):
            integrate_from_zero(tf(lambda s: 1 / s), 1.0)

    def test_strongly_singular_raises(self):
        with pytest.raises(QuadratureNonConvergenceError):
            integrate_from_zero(tf(lambda s: s**-1.5), 1.0)

    def test_near_divergent_but_integrable(self):
        # exponent -0.95: heavy tail, pure power, extrapolation must find it
        val = integrate_from_zero(tf(lambda s: s**-0.95), 1.0)
        assert val == pytest.approx(1 / 0.05, rel=1e-9)

    def test_smooth_transcendental(self):
        val = integrate_from_zero(tf(lambda s: np.exp(2 * s) * s**3, T=2.0), 2.0)
        # by parts: int s^3 e^{2s} = e^{2s}(s^3/2 - 3 s^2/4 + 3 s/4 - 3/8)
        exact = np.exp(4.0) * (4.0 - 3.0 + 1.5 - 0.375) + 0.375
        assert val == pytest.approx(exact, rel=1e-11)

    def test_zero_function(self):
        assert integrate_from_zero(tf(lambda s: 0.0 * s), 1.0) == 0.0

    def test_bad_upper_limit(self):
        with pytest.raises(InvalidParameterError):
            integrate_from_zero(tf(lambda s: s), 0.0)

    @given(p=st.floats(min_value=-0.8, max_value=3.0),
           t=st.floats(min_value=0.01, max_value=10.0))
    @settings(max_examples=30, deadline=None)
    def test_pure_powers_match_antiderivative(self, p, t):
        val = integrate_from_zero(tf(lambda s, p=p: s**p, T=t), t)
        assert val == pytest.approx(t ** (p + 1) / (p + 1), rel=1e-8)


class TestQuadratureSpec:
    def test_tolerances_must_be_positive(self):
        with pytest.raises(InvalidParameterError):
            QuadratureSpec(rel_tol=0.0)
        with pytest.raises(InvalidParameterError):
            QuadratureSpec(abs_tol=-1.0)

    def test_floor_resolution(self):
        assert QuadratureSpec().floor_for(2.0) == pytest.approx(2e-12)
        assert QuadratureSpec(t_floor=1e-9).floor_for(2.0) == 1e-9


class TestCumulativeIntegral:
    def test_matches_antiderivative(self):
        cum = CumulativeIntegral(tf(lambda s: np.cos(s), T=3.0), 3.0)
        for t in (1e-10, 1e-4, 0.3, 1.7, 3.0):
            assert cum.value(t) == pytest.approx(math.sin(t), rel=1e-11, abs=1e-14)

    def test_monotone_for_positive_integrand(self):
        cum = CumulativeIntegral(tf(lambda s: 1 / np.sqrt(s), T=1.0), 1.0)
        ts = np.geomspace(1e-8, 1.0, 60)
        vals = [cum.value(float(t)) for t in ts]
        assert all(b > a for a, b in zip(vals, vals[1:]))

    @given(st.floats(min_value=1e-6, max_value=1.0), st.floats(min_value=1.0, max_value=2.0))
    @settings(max_examples=20, deadline=None)
    def test_monotone_random_pairs(self, t1, scale):
        cum = CumulativeIntegral(tf(lambda s: s**2 + 1.0, T=2.0), 2.0)
        t2 = min(2.0, t1 * scale)
        if t2 > t1:
            assert cum.value(t2) > cum.value(t1)
