import csv
import io
import json
import math

import numpy as np
import pytest

from radarcap.bounds import (
    BOUND_CSV_FIELDS,
    bound_envelope,
    bounds_to_csv,
    high_inr_limit,
    lower_treat_as_noise,
    upper_genie,
    upper_ihara,
    upper_zamir_erez,
)
from radarcap.channel import ChannelParams
from radarcap.rates import gaussian_input_rate


class TestClosedForms:
    def test_treat_as_noise(self):
        assert lower_treat_as_noise(ChannelParams(5, 0)) == pytest.approx(math.log2(6), rel=1e-15)
        assert lower_treat_as_noise(ChannelParams(5, 25)) == pytest.approx(math.log2(1 + 5 / 26), rel=1e-15)
        assert lower_treat_as_noise(ChannelParams(0, 3)) == 0.0

    def test_genie(self):
        assert upper_genie(ChannelParams(5, 0)) == pytest.approx(2.5850, abs=5e-5)
        assert upper_genie(ChannelParams(0, 1)) == 0.0
        assert upper_genie(ChannelParams(5, 0)) == upper_genie(ChannelParams(5, 1e6))

    def test_high_inr_limit(self):
        # quoted to five truncated decimals
        assert high_inr_limit(ChannelParams(5, 1)) == pytest.approx(1.29248, abs=1e-5)
        assert high_inr_limit(ChannelParams(10, 1)) == pytest.approx(1.72971, abs=1e-5)
        assert high_inr_limit(ChannelParams(0, 1)) == 0.0
        for s in (0.5, 5.0, 40.0):
            p = ChannelParams(s, 2.0)
            assert high_inr_limit(p) == 0.5 * upper_genie(p)


class TestIhara:
    @pytest.mark.parametrize("snr", [1.0, 5.0, 10.0])
    def test_collapses_without_interference(self, snr):
        assert upper_ihara(ChannelParams(snr, 0)) == pytest.approx(math.log2(1 + snr), abs=1e-6)

    def test_dominates_gaussian_rate(self):
        p = ChannelParams(5, 5)
        assert upper_ihara(p) >= gaussian_input_rate(p).mi_bits

    def test_grows_with_interference(self):
        vals = [upper_ihara(ChannelParams(5, i)) for i in (1e2, 1e3, 1e4)]
        assert vals[0] < vals[1] < vals[2]


class TestZamirErez:
    def test_reference_cell(self):
        assert upper_zamir_erez(ChannelParams(5, 3.6239)) == pytest.approx(2.2905, abs=0.002)

    def test_no_interference(self):
        assert upper_zamir_erez(ChannelParams(5, 0)) == pytest.approx(math.log2(6) + 1, abs=1e-6)

    def test_high_interference(self):
        p = ChannelParams(5, 1e4)
        v = upper_zamir_erez(p)
        assert v == pytest.approx(0.5 * math.log2(6) + 1, abs=0.02)
        assert v < upper_genie(p)


class TestEnvelope:
    def test_no_interference_collapse(self):
        b = bound_envelope(ChannelParams(5, 0))
        for v in (b.lower_tin, b.upper_genie, b.upper_ihara, b.gauss_rate):
            assert v == pytest.approx(math.log2(6), abs=1e-6)

    def test_ordering_over_sweep(self):
        for inr in np.logspace(-1, 2.5, 12):
            b = bound_envelope(ChannelParams(5, float(inr)))
            assert b.lower_tin <= b.best_upper + 1e-6
            assert b.lower_tin - 1e-9 <= b.gauss_rate <= b.best_upper + 1e-9

    def test_reference_point(self):
        b = bound_envelope(ChannelParams(5, 25))
        # log2(31/26)
        assert b.lower_tin == pytest.approx(0.25376, abs=5e-6)
        assert b.lower_tin < b.best_upper

    def test_serialization(self):
        b = bound_envelope(ChannelParams(5, 2))
        assert json.loads(b.to_json())["upper_ze"] == b.upper_ze
        text = bounds_to_csv([b, bound_envelope(ChannelParams(5, 20))])
        rows = list(csv.reader(io.StringIO(text)))
        assert tuple(rows[0]) == BOUND_CSV_FIELDS
        assert len(rows) == 3
        assert rows[1][2] == f"{b.lower_tin:.6g}"
