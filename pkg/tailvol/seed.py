#!/usr/bin/env python3
"""Starting values for the refinement: the Choi L3 lower bound and its repairs."""

import math
from dataclasses import dataclass
from typing import Literal, Optional

from .specfun import DBL_MIN, LN_TWO_PI, SQRT_TWO_PI, inv_norm_cdf
from .utils.exceptions import DomainError
from .utils.logger import get_logger

logger = get_logger("seed")

SeedSource = Literal[
    "L3",
    "ATM_inverse",
    "ATM_series",
    "repair_near_atm",
    "repair_otm_asymptotic",
    "repair_terminal",
]

SEED_FLOOR = 1e-10

# The quantile of p3 is taken on [DBL_MIN, 1 - 2**-53].
P3_LOWER = DBL_MIN
P3_UPPER = 1.0 - 2.0**-53

ATM_SERIES_CUTOFF = 1e-4
_NEAR_ATM_PRICE = 1e-4
_NEAR_ATM_MONEYNESS = 0.01

_L3_SOURCES = frozenset({"L3", "ATM_inverse", "ATM_series"})


@dataclass(frozen=True, slots=True)
class SeedOutcome:
    """Seed total volatility together with the path that produced it."""

    v0: float
    source: SeedSource
    p3: Optional[float] = None
    z3: Optional[float] = None

    @property
    def repaired(self) -> bool:
        return self.source not in _L3_SOURCES


def near_atm_seed(x: float, c: float) -> float:
    """sqrt(x^2 + 2 pi c^2), the small-price seed around the money."""
    return max(math.sqrt(x * x + 2.0 * math.pi * c * c), SEED_FLOOR)


def _atm_seed(c: float) -> SeedOutcome:
    if c < ATM_SERIES_CUTOFF:
        v0 = SQRT_TWO_PI * c * (1.0 + math.pi * c * c / 12.0)
        return SeedOutcome(max(v0, SEED_FLOOR), "ATM_series")
    p = 0.5 * (1.0 + c)
    z = inv_norm_cdf(p)
    return SeedOutcome(max(2.0 * z, SEED_FLOOR), "ATM_inverse", p3=p, z3=z)


def choi_l3(x: float, c: float) -> SeedOutcome:
    """Choi L3 lower-bound seed.

    With k = -x and E = e^k, p3 = c(c + E)/(2c + E - 1) and z3 = invPhi(p3).
    The seed is the positive root of v^2/2 - z3 v - k = 0, written without
    cancellation for either sign of z3. At the money it reduces to
    2 invPhi((1 + c)/2).

    Args:
        x: Log-moneyness, x <= 0
        c: Normalized OTM price in (0, 1)

    Returns:
        SeedOutcome; falls back to :func:`repair_seed` if any step is not
        finite and positive
    """
    k = -x
    try:
        if k == 0.0:
            return _atm_seed(c)

        e_k = math.exp(k)
        p3 = c * (c + e_k) / (2.0 * c + math.expm1(k))
        if math.isfinite(p3):
            p3 = min(max(p3, P3_LOWER), P3_UPPER)
            z3 = inv_norm_cdf(p3)
            root = math.sqrt(z3 * z3 + 2.0 * k)
            if z3 >= 0.0:
                v0 = z3 + root
            else:
                v0 = 2.0 * k / (root - z3)
            if math.isfinite(v0) and v0 > 0.0:
                return SeedOutcome(max(v0, SEED_FLOOR), "L3", p3=p3, z3=z3)
    except (OverflowError, DomainError):
        pass

    logger.debug(
        "L3 seed not usable, repairing",
        extra={"component": "seed", "operation": "repair", "x": x, "c": c},
    )
    return repair_seed(x, c)


def repair_seed(x: float, c: float) -> SeedOutcome:
    """Conservative seed used when the L3 chain breaks down.

    Paths in order: the near-ATM small-price formula, the guarded OTM
    asymptotic -2x/(D + sqrt(D^2 - 2x)) with D = sqrt(max(-2 ln c - ln 2pi, 0)),
    and finally sqrt(2|x|). Every path is floored at 1e-10.
    """
    if c < _NEAR_ATM_PRICE and abs(x) < _NEAR_ATM_MONEYNESS:
        return SeedOutcome(near_atm_seed(x, c), "repair_near_atm")

    d = math.sqrt(max(-2.0 * math.log(c) - LN_TWO_PI, 0.0))
    discriminant = d * d - 2.0 * x
    if math.isfinite(discriminant) and discriminant > 0.0:
        denominator = d + math.sqrt(discriminant)
        if math.isfinite(denominator) and denominator > 0.0:
            v0 = -2.0 * x / denominator
            if math.isfinite(v0) and v0 > 0.0:
                return SeedOutcome(max(v0, SEED_FLOOR), "repair_otm_asymptotic")

    return SeedOutcome(max(math.sqrt(2.0 * abs(x)), SEED_FLOOR), "repair_terminal")
