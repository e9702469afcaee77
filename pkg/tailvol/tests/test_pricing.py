#!/usr/bin/env python3
"""Tests for the Black price evaluation paths."""

import math

import pytest
from mpmath import mp, mpf

from tailvol.oracle import hp_coeff_a, hp_log_price, hp_price, to_double
from tailvol.pricing import (
    C_J,
    TAU,
    RegionTag,
    coeff_a,
    log_gap_upper,
    log_price_lower,
    lower_spread,
    price_by_path,
    price_cdf,
    price_expanded,
    region_dispatch,
    vega_sqrtfwd,
)
from tailvol.specfun import INV_SQRT_TWO_PI
from tailvol.utils.exceptions import InvalidInput
from tailvol.utils.floats import ulp_distance, ulp_up

SATURATED_X = -9.999500033332494e-5
SATURATED_V = 9.486832980505138


def _beta_reference(x, s):
    with mp.workdps(60):
        return to_double(hp_price(x, s) * mp.exp(mp.mpf(x) / 2))


class TestPriceCdf:
    @pytest.mark.parametrize(
        "ex, v, expected",
        [(0.925, 2.99e-2, 4.42e-5), (0.995, 6.30e-3, 7.65e-4)],
    )
    def test_short_dated_otm_scenarios(self, ex, v, expected):
        assert price_cdf(math.log(ex), v) == pytest.approx(expected, rel=5e-3)

    def test_vanishing_volatility(self):
        assert price_cdf(0.0, 1e-300) <= 1e-300

    def test_deep_tail_underflows(self):
        assert price_cdf(-5.0, 0.1) == 0.0

    def test_bounded(self):
        for x, v in [(0.0, 50.0), (-1.0, 80.0), (-3.0, 0.5)]:
            assert 0.0 <= price_cdf(x, v) <= 1.0


class TestTailObjectives:
    def test_lower_short_dated_example(self):
        ev = log_price_lower(-0.004987541511039051, 0.005000000000000001)
        assert ev.branch == "lower"
        assert ev.log_value == pytest.approx(-7.776203975967922, rel=2e-13)

    def test_lower_atm_matches_log_of_price(self):
        assert log_price_lower(0.0, 0.1).log_value == pytest.approx(
            math.log(price_cdf(0.0, 0.1)), rel=1e-13
        )

    def test_lower_matches_oracle(self):
        x, v = -0.25, 0.3
        reference = to_double(hp_log_price(x, v))
        assert abs(log_price_lower(x, v).log_value - reference) <= 1e-14

    def test_lower_finite_after_price_underflows(self):
        x, v = -5.0, 0.1
        reference = to_double(hp_log_price(x, v))
        assert price_cdf(x, v) == 0.0
        assert log_price_lower(x, v).log_value == pytest.approx(reference, rel=1e-13)

    def test_upper_saturated_example(self):
        ev = log_gap_upper(SATURATED_X, SATURATED_V)
        assert ev.branch == "upper"
        assert ev.log_value == pytest.approx(math.log(2.1015410263114376e-6), rel=1e-12)

    def test_upper_near_one(self):
        ev = log_gap_upper(-1e-6, 7.781184015461386)
        assert math.exp(ev.log_value) == pytest.approx(1e-4, rel=1e-12)

    @pytest.mark.parametrize("x", [-2.0, -0.5, -0.05, 0.0])
    @pytest.mark.parametrize("v", [0.05, 0.3, 1.0, 2.0])
    def test_lower_consistent_with_cdf(self, x, v):
        c = price_cdf(x, v)
        if not 1e-10 <= c <= 0.5:
            pytest.skip("outside the comparison band")
        assert math.exp(log_price_lower(x, v).log_value) == pytest.approx(c, rel=1e-11)

    @pytest.mark.parametrize("x", [-1.0, -0.1, 0.0])
    @pytest.mark.parametrize("v", [0.2, 1.0, 3.0])
    def test_objectives_are_complementary(self, x, v):
        lower = math.exp(log_price_lower(x, v).log_value)
        upper = math.exp(log_gap_upper(x, v).log_value)
        assert lower + upper == pytest.approx(1.0, abs=1e-12)


class TestRegionDispatch:
    def test_region_one(self):
        assert region_dispatch(-1.0, 0.01) is RegionTag.REGION_I

    def test_region_two(self):
        assert region_dispatch(0.0, TAU / 2) is RegionTag.REGION_II

    def test_cody(self):
        assert region_dispatch(-0.1, 1.0) is RegionTag.CODY

    def test_boundary_is_continuous(self):
        s = 2.0 * TAU
        below = math.nextafter(s, 0.0)
        assert region_dispatch(0.0, s) is RegionTag.CODY
        assert region_dispatch(0.0, below) is RegionTag.REGION_II
        assert ulp_distance(price_expanded(0.0, below), price_expanded(0.0, s)) <= 16


class TestExpanded:
    def test_atm_series(self):
        with mp.workdps(60):
            reference = to_double(2 * mp.ncdf(mp.mpf(0.1)) - 1)
        assert price_expanded(0.0, 0.2) == pytest.approx(reference, rel=1e-15)

    @pytest.mark.parametrize(
        "x, s",
        [(-3.0, 0.5), (-0.25, 0.3), (-0.01, 0.05), (-2.0, 4.0)],
    )
    def test_matches_oracle(self, x, s):
        assert price_expanded(x, s) == pytest.approx(_beta_reference(x, s), rel=1e-14)

    def test_asymptotic_region(self):
        # h = -20: the rounding of x/s alone moves beta by about h^2 ulps.
        x, s = -2.0, 0.1
        assert region_dispatch(x, s) is RegionTag.REGION_I
        assert price_expanded(x, s) == pytest.approx(_beta_reference(x, s), rel=1e-13)

    @pytest.mark.parametrize("ex, v0", [(0.925, 2.99e-2), (0.995, 6.30e-3)])
    def test_sweep_accuracy(self, ex, v0):
        x = math.log(ex)
        v = v0
        for _ in range(64):
            c_ref = hp_price(x, v)
            rel = abs(mp.mpf(price_by_path(x, v, "expanded")) - c_ref) / c_ref
            assert rel <= 1e-14
            v = math.nextafter(v, math.inf)

    def test_c_j_threshold(self):
        assert C_J == pytest.approx(0.16650723223355586, rel=1e-15)


class TestCoeffA:
    def test_at_zero(self):
        assert coeff_a(0.0) == 1.0

    @pytest.mark.parametrize("h", [-20.0, -12.0, -3.0, 1.0])
    def test_matches_oracle(self, h):
        assert coeff_a(h) == pytest.approx(to_double(hp_coeff_a(h)), rel=1e-13)

    def test_continuous_across_tail_switch(self):
        inner = math.nextafter(-10.0, 0.0)
        assert coeff_a(-10.0) == pytest.approx(to_double(hp_coeff_a(-10.0)), rel=1e-13)
        assert coeff_a(inner) == pytest.approx(to_double(hp_coeff_a(inner)), rel=1e-13)
        assert coeff_a(inner) == pytest.approx(coeff_a(-10.0), rel=1e-13)


class TestVega:
    def test_vanishing_volatility(self):
        assert vega_sqrtfwd(0.0, 1e-10) == pytest.approx(INV_SQRT_TWO_PI, rel=1e-15)

    def test_saturated(self):
        vega = vega_sqrtfwd(SATURATED_X, SATURATED_V)
        assert vega == pytest.approx(5.19e-6, rel=1e-2)

    def test_matches_finite_difference(self):
        x, s = -0.3, 0.4
        step = 1e-5 * s
        slope = (price_expanded(x, s + step) - price_expanded(x, s - step)) / (2 * step)
        assert vega_sqrtfwd(x, s) == pytest.approx(slope, rel=1e-6)


class TestPriceByPath:
    @pytest.mark.parametrize("path", ["cdf", "erfcxlog", "expanded"])
    def test_paths_agree_in_the_body(self, path):
        x, v = -0.2, 0.4
        reference = to_double(hp_price(x, v))
        assert price_by_path(x, v, path) == pytest.approx(reference, rel=1e-12)

    def test_erfcxlog_upper_half(self):
        x, v = -0.01, 3.0
        c = price_by_path(x, v, "erfcxlog")
        assert c > 0.5
        assert c == pytest.approx(to_double(hp_price(x, v)), rel=1e-14)

    def test_unknown_path(self):
        with pytest.raises(InvalidInput) as exc:
            price_by_path(-0.1, 0.2, "bogus")
        assert exc.value.field == "path"

    def test_ulp_helper(self):
        assert ulp_up(1.0) == 2.0**-52


def _spread_reference(x, v):
    with mp.workdps(60):
        h = mpf(x) / mpf(v)
        t = mpf(v) / 2

        def scaled_erfc(z):
            return mp.exp(z * z) * mp.erfc(z)

        root2 = mp.sqrt(2)
        return to_double(scaled_erfc(-(h + t) / root2) - scaled_erfc(-(h - t) / root2))


class TestLowerSpread:
    @pytest.mark.parametrize(
        "x, v, region",
        [
            (0.0, 1e-3, RegionTag.REGION_II),
            (0.0, 0.01, RegionTag.REGION_II),
            (-0.01709, 0.02, RegionTag.REGION_II),
            (-3.0, 0.1, RegionTag.REGION_I),
            (0.0, 0.8, RegionTag.CODY),
            (-0.05, 0.6, RegionTag.CODY),
            (-0.3, 0.9, RegionTag.CODY),
            (-0.5, 3.0, RegionTag.CODY),
        ],
    )
    def test_matches_oracle(self, x, v, region):
        assert region_dispatch(x, v) is region
        assert lower_spread(x, v) == pytest.approx(_spread_reference(x, v), rel=1e-14)

    def test_objective_carries_spread(self):
        ev = log_price_lower(0.0, 0.01)
        assert ev.spread == lower_spread(0.0, 0.01)
        assert ev.coords.t == 0.005

    def test_literal_option_subtracts_erfcx_values(self):
        ev = log_price_lower(-0.2, 0.4, literal=True)
        assert ev.spread == ev.n_plus - ev.n_minus

    def test_near_money_log_price(self):
        x, v = 0.0, 1e-3
        reference = to_double(hp_log_price(x, v))
        assert ulp_distance(log_price_lower(x, v).log_value, reference) <= 8

    def test_upper_spread_is_sum(self):
        ev = log_gap_upper(-0.1, 2.0)
        assert ev.spread == ev.n_plus + ev.n_minus
