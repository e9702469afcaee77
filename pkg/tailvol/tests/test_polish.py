#!/usr/bin/env python3
"""Tests for the Newton polish against the expanded evaluator."""

import math

import pytest

from tailvol.dispatch import solve
from tailvol.normalize import beta_from_c, c_from_beta
from tailvol.oracle import hp_price, to_double
from tailvol.polish import POLISH_CUTOFFS, jackel_newton_polish, resolve_cutoff
from tailvol.pricing import C_J, price_expanded, vega_sqrtfwd
from tailvol.utils.floats import ulp_distance, ulp_up


class TestCutoff:
    def test_named_cutoffs(self):
        assert resolve_cutoff("half") == 0.5
        assert resolve_cutoff("cJ") == C_J
        assert set(POLISH_CUTOFFS) == {"half", "cJ"}

    def test_unknown_name(self):
        with pytest.raises(KeyError):
            resolve_cutoff("quarter")


class TestPolish:
    def test_skipped_above_cutoff(self):
        s = 7.781184015461386
        s_next, report = jackel_newton_polish(-1e-6, s, 0.9999, 0.5)
        assert s_next == s
        assert not report.applied
        assert math.isnan(report.beta_before)
        assert math.isnan(report.beta_after)

    def test_zero_residual_is_fixed_point(self):
        x, s = -0.5, 0.3
        c = c_from_beta(price_expanded(x, s), x)
        s_next, report = jackel_newton_polish(x, s, c, 0.5)
        assert report.applied
        assert ulp_distance(s_next, s) <= 4

    @pytest.mark.parametrize("x, v", [(-0.5, 0.3), (-2.0, 0.8), (-0.05, 0.1)])
    def test_lands_within_one_spacing(self, x, v):
        c = to_double(hp_price(x, v))
        s = solve(x, c).total_vol
        s_next, report = jackel_newton_polish(x, s, c, 0.5)
        assert report.applied
        target = beta_from_c(c, x)
        after = abs(report.beta_after - target)
        # Newton lands within one s-spacing of the root, up to evaluation noise.
        spacing = vega_sqrtfwd(x, s_next) * ulp_up(s_next)
        assert after <= spacing + 4.0 * ulp_up(target)

    def test_forced_above_half_stays_bounded(self):
        x, c = -1e-6, 0.9999
        s = solve(x, c).total_vol
        s_next, report = jackel_newton_polish(x, s, c, cutoff=1.0)
        assert report.applied
        assert report.s_before == s
        assert math.isfinite(s_next) and s_next > 0.0
        assert ulp_distance(s_next, s) <= 10000
