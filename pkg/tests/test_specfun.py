import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from radarcap.specfun import SERIES_SWITCH, bessel_i0, eval_bessel_i0, log_bessel_i0


def brute_series_i0(x, terms=80):
    """I0 summed term by term in exact rational arithmetic, then rounded."""
    xf = Fraction(x)
    total = Fraction(0)
    term = Fraction(1)
    for k in range(terms):
        if k:
            term *= xf * xf / 4 / (k * k)
        total += term
    return float(total)


class TestBesselValue:
    def test_zero(self):
        assert bessel_i0(0.0) == 1.0

    def test_one_against_exact_series(self):
        assert bessel_i0(1.0) == pytest.approx(brute_series_i0(1.0), rel=1e-15)

    @pytest.mark.parametrize("x", [0.25, 3.0, 12.5, 29.9])
    def test_series_branch_against_exact_series(self, x):
        assert bessel_i0(x) == pytest.approx(brute_series_i0(x, 200), rel=2e-15)

    def test_large_argument_leading_terms(self):
        x = 50.0
        approx = math.exp(x) / math.sqrt(2 * math.pi * x) * (1 + 1 / (8 * x))
        assert abs(bessel_i0(x) / approx - 1) <= 1e-3

    def test_overflow_is_signalled(self):
        with pytest.raises(OverflowError):
            bessel_i0(800.0)

    @pytest.mark.parametrize("bad", [-1.0, float("nan")])
    def test_rejects_bad_argument(self, bad):
        with pytest.raises(ValueError):
            bessel_i0(bad)

    def test_result_record_consistent(self):
        r = eval_bessel_i0(7.5)
        assert r.value == pytest.approx(math.exp(r.log_value), rel=1e-15)


class TestLogBessel:
    def test_zero(self):
        assert log_bessel_i0(0.0) == 0.0

    def test_one_consistent_with_value(self):
        assert log_bessel_i0(1.0) == pytest.approx(math.log(bessel_i0(1.0)), rel=1e-15)

    def test_huge_argument(self):
        x = 1e6
        ref = x - 0.5 * math.log(2 * math.pi * x)
        assert abs(log_bessel_i0(x) - ref) <= 1e-6 * ref

    @pytest.mark.parametrize("x", [1e-3, 0.5, 5.0, 29.999, 30.0, 30.001, 45.0, 200.0, 700.0, 5e4])
    def test_against_scipy_scaled_bessel(self, x):
        ref = math.log(special.i0e(x)) + x
        assert log_bessel_i0(x) == pytest.approx(ref, rel=1e-14, abs=1e-15)

    def test_continuous_across_branch_switch(self):
        below = log_bessel_i0(np.nextafter(SERIES_SWITCH, 0))
        above = log_bessel_i0(SERIES_SWITCH)
        assert abs(above - below) < 1e-13

    def test_array_matches_scalar_path(self):
        xs = np.array([[0.0, 0.3, 10.0], [29.0, 31.0, 1e3]])
        out = log_bessel_i0(xs)
        assert out.shape == xs.shape
        np.testing.assert_allclose(out, [[log_bessel_i0(float(v)) for v in row] for row in xs], rtol=1e-14)

    def test_array_rejects_negative(self):
        with pytest.raises(ValueError):
            log_bessel_i0(np.array([1.0, -0.5]))

    @settings(max_examples=200, deadline=None)
    @given(st.floats(min_value=0.0, max_value=1e5, allow_nan=False))
    def test_bounds_and_value_at_least_one(self, x):
        # I0(x) >= 1 and I0(x) <= e^x
        v = log_bessel_i0(x)
        assert -1e-300 <= v <= x + 1e-12

    @settings(max_examples=100, deadline=None)
    @given(st.floats(min_value=0.0, max_value=1e4), st.floats(min_value=1e-6, max_value=10.0))
    def test_monotone(self, x, dx):
        assert log_bessel_i0(x + dx) >= log_bessel_i0(x)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(min_value=0.0, max_value=700.0))
    def test_exp_of_log_is_value(self, x):
        assert math.exp(log_bessel_i0(x)) == pytest.approx(bessel_i0(x), rel=1e-13)
