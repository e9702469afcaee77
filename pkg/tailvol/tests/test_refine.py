#!/usr/bin/env python3
"""Tests for the tail-log refinement steps and their curvature conditions."""

import math
import sys

import numpy as np
import pytest
from mpmath import mp, mpf

from tailvol.config import ORACLE_DIGITS, ORACLE_GUARD_DIGITS
from tailvol.oracle import hp_implied_vol, hp_price, to_double
from tailvol.pricing import log_gap_upper, log_price_lower
from tailvol.refine import (
    REFINE_STEPS,
    chebyshev_step,
    curvature_diagnostics,
    halley_step,
    lower_ratios,
    lower_third_ratio,
    refine3,
    upper_ratios,
)
from tailvol.seed import choi_l3
from tailvol.specfun import norm_cdf, norm_pdf
from tailvol.utils.exceptions import DegenerateDifference
from tailvol.utils.floats import ulp_distance, ulp_up

CURVATURE_XS = np.linspace(-8.0, 0.0, 100).tolist()
CURVATURE_VS = np.geomspace(0.01, 6.0, 100).tolist()

MONOTONE_XS = np.linspace(-5.0, 0.0, 50).tolist()
MONOTONE_VS = np.linspace(0.01, 4.0, 50).tolist()

REFERENCE_V = 7.7811840154613839563


def _rounded_price_and_root(x, v_star):
    """Oracle price at v_star rounded to double, and the exact root of that price.

    The rounded price is within half an ulp of c(v_star), so two Newton steps
    on ln c from v_star reach the root to working precision.
    """
    with mp.workdps(ORACLE_DIGITS + ORACLE_GUARD_DIGITS):
        c = to_double(hp_price(x, v_star))
        if not sys.float_info.min <= c < 1.0:
            return c, math.nan
        log_target = mp.log(mpf(c))
        root = mpf(v_star)
        for _ in range(2):
            price = hp_price(x, root)
            root -= (mp.log(price) - log_target) * price / mp.npdf(x / root + root / 2)
        return c, to_double(root)


@pytest.fixture(scope="module")
def monotone_grid():
    points = []
    for x in MONOTONE_XS:
        for v_star in MONOTONE_VS:
            c, root = _rounded_price_and_root(x, v_star)
            if math.isfinite(root):
                points.append((x, c, root))
    return points


def _central(f, v, rel_step=2.0**-20):
    step = rel_step * v
    return (f(v + step) - f(v - step)) / (2.0 * step)


def _curvature_points(branch):
    for x in CURVATURE_XS:
        for v in CURVATURE_VS:
            try:
                yield x, v, curvature_diagnostics(x, v, branch)
            except DegenerateDifference:
                continue


class TestRatios:
    def test_lower_atm(self):
        g_prime, _ = lower_ratios(log_price_lower(0.0, 0.2))
        expected = norm_pdf(0.1) / (2.0 * norm_cdf(0.1) - 1.0)
        assert g_prime == pytest.approx(expected, rel=1e-12)

    def test_lower_against_finite_differences(self):
        x, v = -0.25, 0.5
        g_prime, d2_ratio = lower_ratios(log_price_lower(x, v))

        def log_c(u):
            return log_price_lower(x, u).log_value

        def log_g_prime(u):
            return math.log(lower_ratios(log_price_lower(x, u))[0])

        assert g_prime == pytest.approx(_central(log_c, v), rel=1e-6)
        assert d2_ratio == pytest.approx(_central(log_g_prime, v), rel=1e-5)

    def test_lower_third_ratio(self):
        x, v = -0.25, 0.5

        def g_second(u):
            g_prime, d2_ratio = lower_ratios(log_price_lower(x, u))
            return g_prime * d2_ratio

        g_prime, _ = lower_ratios(log_price_lower(x, v))
        expected = _central(g_second, v) / g_prime
        assert lower_third_ratio(log_price_lower(x, v)) == pytest.approx(
            expected, rel=1e-4
        )

    def test_upper_atm(self):
        l_prime, _ = upper_ratios(log_gap_upper(0.0, 1.0))
        c = 2.0 * norm_cdf(0.5) - 1.0
        assert l_prime == pytest.approx(-norm_pdf(0.5) / (1.0 - c), rel=1e-12)

    @pytest.mark.parametrize("x, v", [(-1e-6, 7.78), (-0.5, 2.0)])
    def test_upper_against_finite_differences(self, x, v):
        l_prime, d2_ratio = upper_ratios(log_gap_upper(x, v))

        def log_gap(u):
            return log_gap_upper(x, u).log_value

        def log_abs_l_prime(u):
            return math.log(-upper_ratios(log_gap_upper(x, u))[0])

        assert l_prime == pytest.approx(_central(log_gap, v), rel=1e-6)
        assert d2_ratio == pytest.approx(_central(log_abs_l_prime, v), rel=1e-5)


class TestSteps:
    def test_chebyshev_fixed_point(self):
        x, v = -0.25, 0.4
        target = log_price_lower(x, v).log_value
        v_next, diag = chebyshev_step(x, v, target)
        assert v_next == v
        assert diag.eta == 0.0
        assert not diag.fallback

    def test_halley_fixed_point(self):
        x, v = -0.25, 3.0
        target = log_gap_upper(x, v).log_value
        v_next, diag = halley_step(x, v, target)
        assert v_next == v
        assert diag.branch == "upper"

    @pytest.mark.parametrize("x", [-0.5, -1.0])
    @pytest.mark.parametrize("v_star", [0.8, 1.5])
    def test_cubic_contraction(self, x, v_star):
        c = to_double(hp_price(x, v_star))
        v0 = v_star * (1.0 - 1e-3)
        if c <= 0.5:
            v1, _ = chebyshev_step(x, v0, math.log(c))
        else:
            v1, _ = halley_step(x, v0, math.log(1.0 - c))
        assert abs(v1 - v_star) / v_star < 1e-8


class TestRefine3:
    def test_lower_branch_shape(self):
        trace = refine3(-0.1, 0.3, choi_l3(-0.1, 0.3).v0)
        assert trace.branch == "lower"
        assert len(trace.iterates) == REFINE_STEPS + 1
        assert len(trace.steps) == REFINE_STEPS
        assert not trace.interrupted

    def test_upper_branch_near_one(self):
        x, c = -1e-6, 0.9999
        trace = refine3(x, c, choi_l3(x, c).v0)
        assert trace.branch == "upper"
        assert ulp_distance(trace.final, REFERENCE_V) <= 8

    @pytest.mark.parametrize(
        "x, v, max_ulps", [(-0.25, 0.6, 8), (-2.0, 1.5, 150)]
    )
    def test_accuracy_from_l3_seed(self, x, v, max_ulps):
        c = to_double(hp_price(x, v))
        root = to_double(hp_implied_vol(x, c))
        trace = refine3(x, c, choi_l3(x, c).v0)
        assert ulp_distance(trace.final, root) <= max_ulps

    @pytest.mark.parametrize("branch", ["lower", "upper"])
    def test_iterates_increase_toward_root(self, monotone_grid, branch):
        failures = []
        for x, c, root in monotone_grid:
            if (c <= 0.5) != (branch == "lower"):
                continue
            band = 8.0 * ulp_up(root)
            iterates = refine3(x, c, choi_l3(x, c).v0).iterates
            for before, after in zip(iterates, iterates[1:]):
                # At the root, rounding may move an iterate within the band.
                if after < before and abs(after - root) > band:
                    failures.append((x, c, iterates))
            if max(iterates) > root + band:
                failures.append((x, c, iterates))
        assert failures == []


class TestCurvature:
    def test_lower_objective_is_concave(self):
        for _, _, diag in _curvature_points("lower"):
            assert diag.q <= 1e-12 * abs(diag.y)

    def test_upper_ratio_is_positive(self):
        for _, _, diag in _curvature_points("upper"):
            assert diag.q >= -1e-12 * (abs(diag.a) + abs(diag.y))

    def test_lower_scalar_inequality(self):
        for _, _, diag in _curvature_points("lower"):
            scale = diag.y**2 + diag.a**2 + diag.beta_v
            assert diag.scalar_inequality >= -1e-10 * scale

    def test_upper_schwarzian_bound(self):
        for _, _, diag in _curvature_points("upper"):
            scale = diag.y**2 + diag.a**2 + diag.beta_v
            assert diag.schwarz_bound <= 1e-10 * scale
