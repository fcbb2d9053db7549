import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from radarcap.channel import (
    ChannelParams,
    DiscreteInput,
    InfeasibleInputError,
    beta_of_input,
    conditional_mean,
    conditional_mean_quadrature,
    integrate_against_kernel,
    kernel,
    kernel_alt,
    kernel_cdf,
    kernel_mass,
    ks_distance,
    log_kernel_matrix,
    noise_modsq_logpdf,
    noise_modsq_pdf,
    output_pdf,
    output_window,
    sample_output_modsq,
)
from radarcap.quadrature import QuadratureError, integrate_halfline
from radarcap.specfun import bessel_i0


def closed_form_no_interference(x, y):
    return math.exp(-(x + y)) * bessel_i0(2 * math.sqrt(x * y))


class TestParams:
    @pytest.mark.parametrize("snr,inr", [(-1, 0), (0, -1e-9), (math.inf, 1), (1, math.nan)])
    def test_rejects(self, snr, inr):
        with pytest.raises(ValueError):
            ChannelParams(snr, inr)


class TestDiscreteInput:
    def test_validation(self):
        with pytest.raises(ValueError):
            DiscreteInput((1.0, 0.5), (0.5, 0.5))
        with pytest.raises(ValueError):
            DiscreteInput((0.0, 1.0), (0.5, 0.6))
        with pytest.raises(ValueError):
            DiscreteInput((-1.0,), (1.0,))
        with pytest.raises(ValueError):
            DiscreteInput((), ())

    def test_from_arrays_sorts_merges_and_drops(self):
        inp = DiscreteInput.from_arrays([3.0, 1.0, 3.0, 7.0], [0.2, 0.5, 0.2, 0.0])
        assert inp.locations == (1.0, 3.0)
        np.testing.assert_allclose(inp.probs, [0.5 / 0.9, 0.4 / 0.9])

    def test_power_check(self):
        inp = DiscreteInput((0.0, 10.0), (0.5, 0.5))
        inp.check_power(ChannelParams(5.0, 1.0))
        with pytest.raises(InfeasibleInputError):
            inp.check_power(ChannelParams(4.9, 1.0))

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.tuples(st.floats(0, 1e3), st.floats(1e-6, 1.0)), min_size=1, max_size=12,
                    unique_by=lambda t: t[0]))
    def test_json_round_trip(self, pts):
        inp = DiscreteInput.from_arrays([a for a, _ in pts], [b for _, b in pts])
        back = DiscreteInput.from_json(inp.to_json())
        assert back == inp

    def test_from_dict_rejects_malformed(self):
        for bad in ({}, {"points": [{"x": 1}]}, {"points": [{"x": 1, "p": 0.5}]},
                    {"points": [{"x": 1, "p": 1.5}, {"x": 2, "p": -0.5}]}):
            with pytest.raises(ValueError):
                DiscreteInput.from_dict(bad)

    def test_json_shape(self):
        d = json.loads(DiscreteInput((0.0, 2.0), (0.25, 0.75)).to_json())
        assert d == {"points": [{"x": 0.0, "p": 0.25}, {"x": 2.0, "p": 0.75}]}


class TestNoiseLaw:
    def test_origin(self):
        assert noise_modsq_pdf(0.0, ChannelParams(0, 0)) == 1.0

    @pytest.mark.parametrize("t", [0.0, 0.7, 4.0, 30.0])
    def test_central_case(self, t):
        assert noise_modsq_pdf(t, ChannelParams(0, 0)) == pytest.approx(math.exp(-t), rel=1e-15)

    @pytest.mark.parametrize("inr", [0.3, 5.0, 400.0])
    def test_against_scaled_noncentral_chi_square(self, inr):
        # 2|W|^2 is noncentral chi-square with 2 dof and noncentrality 2I
        t = np.linspace(0.01, inr + 20 * math.sqrt(inr + 1), 50)
        ref = np.log(2.0) + stats.ncx2.logpdf(2 * t, 2, 2 * inr)
        np.testing.assert_allclose(noise_modsq_logpdf(t, ChannelParams(0, inr)), ref, rtol=1e-9, atol=1e-9)

    def test_moments(self):
        params = ChannelParams(0, 5.0)
        mass = integrate_halfline(lambda t: noise_modsq_pdf(t, params), 200.0)
        mean = integrate_halfline(lambda t: t * noise_modsq_pdf(t, params), 200.0)
        assert mass == pytest.approx(1.0, abs=1e-8)
        assert mean == pytest.approx(6.0, abs=1e-8)

    def test_negative_argument(self):
        with pytest.raises(ValueError):
            noise_modsq_pdf(-1.0, ChannelParams(0, 1))


class TestKernel:
    @pytest.mark.parametrize("x,y", [(0.0, 0.0), (1.0, 2.0), (10.0, 7.0), (40.0, 45.0)])
    def test_no_interference_closed_form(self, x, y):
        p = ChannelParams(0, 0)
        ref = closed_form_no_interference(x, y)
        assert kernel(x, y, p) == pytest.approx(ref, rel=1e-10)
        assert kernel_alt(x, y, p) == pytest.approx(ref, rel=1e-10)

    @pytest.mark.parametrize("y,inr", [(0.5, 1.0), (9.0, 9.0), (30.0, 12.0)])
    def test_zero_input_is_noise(self, y, inr):
        p = ChannelParams(0, inr)
        assert kernel(0.0, y, p) == pytest.approx(noise_modsq_pdf(y, p), rel=1e-10)
        assert kernel_alt(0.0, y, p) == pytest.approx(noise_modsq_pdf(y, p), rel=1e-10)

    def test_monte_carlo_density(self):
        # independent sampler: |1 + e^{j Theta} + Z|^2, density near y = 1 from a narrow bin
        rng = np.random.default_rng(20240607)
        n = 10_000_000
        theta = rng.uniform(0, 2 * math.pi, n)
        z = rng.normal(scale=math.sqrt(0.5), size=(2, n))
        y = (1 + np.cos(theta) + z[0]) ** 2 + (np.sin(theta) + z[1]) ** 2
        h = 0.02
        frac = np.count_nonzero(np.abs(y - 1.0) < h) / n
        est = frac / (2 * h)
        se = math.sqrt(frac * (1 - frac) / n) / (2 * h)
        # bin-average correction is O(h^2 K''), far below the sampling error here
        assert abs(kernel(1.0, 1.0, ChannelParams(0, 1.0)) - est) < 3 * se

    @settings(max_examples=100, deadline=None)
    @given(st.floats(0, 50), st.floats(0, 50), st.floats(0, 50))
    def test_two_forms_symmetry_and_bounds(self, x, y, inr):
        p = ChannelParams(0, inr)
        k = kernel(x, y, p)
        assert kernel_alt(x, y, p) == pytest.approx(k, rel=1e-8)
        assert kernel(y, x, p) == pytest.approx(k, rel=1e-8)
        assert math.exp(-(x + y + inr)) <= k * (1 + 1e-12) and k <= 1.0

    def test_log_matrix_matches_scalar(self):
        p = ChannelParams(0, 7.0)
        xs = np.array([0.0, 3.0, 25.0])
        ys = np.array([0.1, 5.0, 40.0, 90.0])
        m = log_kernel_matrix(xs, ys, p)
        ref = np.log([[kernel(a, b, p) for b in ys] for a in xs])
        np.testing.assert_allclose(m, ref, rtol=1e-9)

    def test_log_matrix_far_tail_finite(self):
        m = log_kernel_matrix(np.array([0.0]), np.array([5000.0]), ChannelParams(0, 1.0))
        assert np.isfinite(m).all() and m[0, 0] < -4000

    def test_matrix_unconverged_raises(self, monkeypatch):
        from radarcap import _backend

        monkeypatch.setattr(_backend, "log_kernel_matrix", lambda *a, **k: (np.zeros((1, 1)), 1.0))
        with pytest.raises(QuadratureError):
            log_kernel_matrix(np.array([1.0]), np.array([1.0]), ChannelParams(0, 1.0))

    @pytest.mark.parametrize("x,inr", [(0.0, 0.0), (3.0, 9.0), (40.0, 2.0), (12.0, 50.0)])
    def test_normalization(self, x, inr):
        assert kernel_mass(x, ChannelParams(0, inr)) == pytest.approx(1.0, abs=1e-8)


class TestOutputLaw:
    def test_single_mass_is_kernel(self):
        p = ChannelParams(5, 3)
        inp = DiscreteInput.single(5.0)
        for y in (0.2, 8.0, 20.0):
            assert output_pdf(y, inp, p) == pytest.approx(kernel(5.0, y, p), rel=1e-9)

    def test_linearity(self):
        p = ChannelParams(5, 3)
        inp = DiscreteInput((0.0, 10.0), (0.5, 0.5))
        ys = np.array([0.5, 4.0, 15.0, 30.0])
        ref = [0.5 * kernel(0.0, y, p) + 0.5 * kernel(10.0, y, p) for y in ys]
        np.testing.assert_allclose(output_pdf(ys, inp, p), ref, rtol=1e-9)

    @pytest.mark.parametrize("seed", range(3))
    def test_normalization_random_inputs(self, seed):
        rng = np.random.default_rng(seed)
        params = ChannelParams(10.0, float(rng.uniform(0, 30)))
        inp = DiscreteInput.from_arrays(rng.uniform(0, 30, 5), rng.dirichlet(np.ones(5)))
        lo, hi, n0 = output_window(params, min(inp.locations), max(inp.locations))
        mass = integrate_halfline(lambda y: output_pdf(y, inp, params), hi, y_lower=lo, min_panels=n0)
        assert mass == pytest.approx(1.0, abs=1e-8)


class TestBeta:
    def test_examples(self):
        assert beta_of_input(DiscreteInput.single(0.0)) == 0.0
        assert beta_of_input(DiscreteInput.single(5.0)) == pytest.approx(5.0, rel=1e-15)
        inp = DiscreteInput((0.0, 2.0), (0.5, 0.5))
        assert beta_of_input(inp) == pytest.approx(-math.log(0.5 * (1 + math.exp(-2))), rel=1e-14)
        assert beta_of_input(inp) <= inp.power

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.tuples(st.floats(0, 100), st.floats(0.01, 1)), min_size=1, max_size=8,
                    unique_by=lambda t: t[0]))
    def test_jensen(self, pts):
        inp = DiscreteInput.from_arrays([a for a, _ in pts], [b for _, b in pts])
        assert 0 <= beta_of_input(inp) <= inp.power + 1e-12


class TestConditionalMean:
    def test_values(self):
        assert conditional_mean(0.0, ChannelParams(0, 0)) == 1.0
        assert conditional_mean(5.0, ChannelParams(5, 25)) == 31.0

    def test_quadrature(self):
        p = ChannelParams(0, 9.5)
        assert conditional_mean_quadrature(3.7, p) == pytest.approx(14.2, rel=1e-7)
        assert conditional_mean(3.7, p, verify=True) == pytest.approx(14.2)

    def test_second_moment(self):
        # E[Y^2 | x] for |a + Z|^2 with a ~ amplitude mixture: (x + I)^2 + 2 x I + 4 (x + I) + 2
        x, inr = 4.0, 6.0
        m2 = integrate_against_kernel(lambda y: y * y, x, ChannelParams(0, inr))
        assert m2 == pytest.approx((x + inr) ** 2 + 2 * x * inr + 4 * (x + inr) + 2, rel=1e-8)


class TestSampler:
    def test_pure_noise_mean(self):
        n = 200_000
        b = sample_output_modsq(0.0, n, 1, ChannelParams(0, 0))
        assert b.count == n and np.all(b.values >= 0)
        assert abs(b.values.mean() - 1.0) < 4 / math.sqrt(n)

    def test_mean_matches_conditional_mean(self):
        n = 200_000
        v = sample_output_modsq(5.0, n, 2, ChannelParams(5, 25)).values
        assert abs(v.mean() - 31.0) < 5 * v.std() / math.sqrt(n)

    def test_deterministic(self):
        p = ChannelParams(0, 3.0)
        a = sample_output_modsq(2.0, 100, 9, p).values
        b = sample_output_modsq(2.0, 100, 9, p).values
        np.testing.assert_array_equal(a, b)

    def test_ks_against_quadrature_cdf(self):
        n = 100_000
        p = ChannelParams(0, 1.0)
        d = ks_distance(sample_output_modsq(1.0, n, 3, p).values, kernel_cdf(1.0, p))
        assert d < 1.63 / math.sqrt(n)

    def test_ks_detects_wrong_law(self):
        n = 100_000
        d = ks_distance(sample_output_modsq(1.0, n, 3, ChannelParams(0, 1.3)).values,
                        kernel_cdf(1.0, ChannelParams(0, 1.0)))
        assert d > 1.63 / math.sqrt(n)
