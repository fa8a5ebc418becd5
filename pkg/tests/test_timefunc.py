import math

import numpy as np
import pytest

from gradest import (DomainError, TableFormatError, TimeFunction,
                     differentiate, differentiate_info, table_function)


class TestDifferentiate:
    def test_square(self):
        f = TimeFunction(fn=lambda t: t * t, T=2.0)
        assert differentiate(f, 1.0) == pytest.approx(2.0, abs=1e-8)

    def test_sinh_squared_chain_rule(self):
        f = TimeFunction(fn=lambda t: math.sinh(t) ** 2, T=2.0)
        assert differentiate(f, 1.0) == pytest.approx(math.sinh(2.0), abs=1e-6)

    def test_analytic_passthrough_is_exact(self):
        f = TimeFunction(fn=lambda t: t * t, T=2.0, deriv=lambda t: 123.456)
        val, how = differentiate_info(f, 1.0)
        assert val == 123.456 and how == "analytic"

    def test_one_sided_at_horizon(self):
        f = TimeFunction(fn=lambda t: t**3, T=2.0)
        val, how = differentiate_info(f, 2.0)
        assert how == "one-sided"
        assert val == pytest.approx(12.0, rel=1e-5)

    def test_outside_domain(self):
        f = TimeFunction(fn=lambda t: t, T=2.0)
        with pytest.raises(DomainError):
            differentiate(f, 2.5)
        with pytest.raises(DomainError):
            differentiate(f, 0.0)


class TestTableFunction:
    def test_hermite_reproduces_cubic_exactly(self):
        ts = np.linspace(0.1, 2.0, 9)
        rows = [(t, t**3 - t, 3 * t**2 - 1) for t in ts]
        f = table_function(rows)
        for t in (0.13, 0.5, 1.234, 1.99):
            assert f(t) == pytest.approx(t**3 - t, rel=1e-13, abs=1e-13)
            assert f.deriv(t) == pytest.approx(3 * t**2 - 1, rel=1e-12, abs=1e-12)

    def test_rejects_bad_tables(self):
        with pytest.raises(TableFormatError):
            table_function([(0.1, 1.0, 0.0)])
        with pytest.raises(TableFormatError):
            table_function([(0.2, 1.0, 0.0), (0.1, 2.0, 0.0)])
        with pytest.raises(TableFormatError):
            table_function([(-0.1, 1.0, 0.0), (0.2, 2.0, 0.0)])

    def test_above_range_evaluation_rejected(self):
        f = table_function([(0.1, 1.0, 0.0), (1.0, 2.0, 0.0)])
        with pytest.raises(DomainError):
            f(1.5)

    def test_below_range_power_extension(self):
        # rows of b = t^2 on [0.1, 1]: below 0.1 continue as the fitted power
        rows = [(t, t * t, 2 * t) for t in np.linspace(0.1, 1.0, 10)]
        f = table_function(rows)
        assert f(0.01) == pytest.approx(1e-4, rel=1e-12)
        assert f.deriv(0.01) == pytest.approx(0.02, rel=1e-12)
        assert f.power == pytest.approx(2.0)

    def test_vectorized_evaluation(self):
        f = table_function([(0.1, 0.1, 1.0), (1.0, 1.0, 1.0), (2.0, 2.0, 1.0)])
        out = f.eval_array(np.array([0.5, 1.5]))
        assert out == pytest.approx([0.5, 1.5])
