#!/usr/bin/env python3
"""Optional last-bit Newton correction against the expanded reference price."""

import math
from dataclasses import dataclass
from typing import Optional, Tuple

from .config import POLISH_CUTOFF
from .normalize import beta_from_c
from .pricing import C_J, price_expanded, vega_sqrtfwd

POLISH_CUTOFFS = {"half": 0.5, "cJ": C_J}


@dataclass(frozen=True, slots=True)
class PolishReport:
    """Outcome of one polish attempt.

    ``beta_before`` is NaN when the polish was skipped by the cutoff.
    """

    applied: bool
    beta_target: float
    beta_before: float
    s_before: float
    s_after: float
    x: float

    @property
    def beta_after(self) -> float:
        if not self.applied:
            return self.beta_before
        return price_expanded(self.x, self.s_after)


def resolve_cutoff(name: Optional[str] = None) -> float:
    """Price cutoff for a named polish band ("half" or "cJ")."""
    return POLISH_CUTOFFS[name or POLISH_CUTOFF]


def jackel_newton_polish(
    x: float, s: float, c_target: float, cutoff: Optional[float] = None
) -> Tuple[float, PolishReport]:
    """One Newton step s + (beta* - beta_J(x, s)) / nu(x, s).

    Args:
        x: Log-moneyness, x <= 0
        s: Refined total volatility
        c_target: Normalized price being inverted
        cutoff: Largest c that is polished; the configured band by default

    Returns:
        Tuple of the corrected volatility and the report. ``s`` comes back
        unchanged above the cutoff or when the step is not finite.
    """
    limit = resolve_cutoff() if cutoff is None else cutoff
    beta_target = beta_from_c(c_target, x)
    if c_target > limit:
        return s, PolishReport(False, beta_target, math.nan, s, s, x)

    beta_before = price_expanded(x, s)
    vega = vega_sqrtfwd(x, s)
    s_next = s + (beta_target - beta_before) / vega if vega > 0.0 else math.nan
    if not (math.isfinite(s_next) and s_next > 0.0):
        return s, PolishReport(False, beta_target, beta_before, s, s, x)
    return s_next, PolishReport(True, beta_target, beta_before, s, s_next, x)
