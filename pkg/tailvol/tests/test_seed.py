#!/usr/bin/env python3
"""Tests for the starting-value rules."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tailvol.normalize import C_UPPER_LIMIT
from tailvol.oracle import hp_implied_vol, hp_price, to_double
from tailvol.seed import (
    SEED_FLOOR,
    choi_l3,
    near_atm_seed,
    repair_seed,
)
from tailvol.specfun import SQRT_TWO_PI, inv_norm_cdf
from tailvol.utils.floats import ulp_distance


class TestChoiL3:
    def test_atm_inverse(self):
        seed = choi_l3(0.0, 0.5)
        assert seed.source == "ATM_inverse"
        assert ulp_distance(seed.v0, 1.3489795003921634) <= 4
        assert not seed.repaired

    def test_atm_series(self):
        c = 1e-6
        seed = choi_l3(0.0, c)
        assert seed.source == "ATM_series"
        assert seed.v0 == SQRT_TWO_PI * c * (1.0 + math.pi * c * c / 12.0)

    def test_otm_seed_is_below_root(self):
        x, c = -0.25, 0.05
        seed = choi_l3(x, c)
        assert seed.source == "L3"
        assert 0.0 < seed.v0 <= to_double(hp_implied_vol(x, c))
        assert seed.z3 == inv_norm_cdf(seed.p3)

    def test_overflowing_moneyness_is_repaired(self):
        seed = choi_l3(-720.0, 5e-324)
        assert seed.repaired
        assert math.isfinite(seed.v0) and seed.v0 > 0.0

    @pytest.mark.parametrize("x", np.linspace(-5.0, -0.05, 12).tolist())
    @pytest.mark.parametrize("v", np.geomspace(0.05, 4.0, 12).tolist())
    def test_lower_bound_on_oracle_grid(self, x, v):
        c = to_double(hp_price(x, v))
        if not (1e-300 < c < C_UPPER_LIMIT):
            pytest.skip("price outside the double range")
        root = to_double(hp_implied_vol(x, c))
        assert choi_l3(x, c).v0 <= root * (1.0 + 1e-12)

    @given(
        x=st.floats(min_value=-720.0, max_value=0.0),
        c=st.floats(min_value=5e-324, max_value=C_UPPER_LIMIT, exclude_max=True),
    )
    @settings(max_examples=500, deadline=None)
    def test_total(self, x, c):
        seed = choi_l3(x, c)
        assert math.isfinite(seed.v0)
        assert seed.v0 >= SEED_FLOOR


class TestRepair:
    def test_near_atm(self):
        seed = repair_seed(0.0, 1e-6)
        assert seed.source == "repair_near_atm"
        assert seed.v0 == pytest.approx(SQRT_TWO_PI * 1e-6, rel=1e-15)

    def test_otm_asymptotic(self):
        seed = repair_seed(-1.0, 0.3)
        assert seed.source == "repair_otm_asymptotic"
        assert math.isfinite(seed.v0) and seed.v0 > 0.0

    def test_extreme_moneyness(self):
        seed = repair_seed(-720.0, 5e-324)
        assert seed.source == "repair_otm_asymptotic"
        assert 10.0 < seed.v0 < 20.0

    def test_floor(self):
        assert near_atm_seed(0.0, 1e-300) == SEED_FLOOR
        assert near_atm_seed(-1e-3, 1e-4) == pytest.approx(
            math.sqrt(1e-6 + 2.0 * math.pi * 1e-8), rel=1e-15
        )
