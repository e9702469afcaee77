#!/usr/bin/env python3
"""Top-level implied total volatility solver.

Branch order for a normalized quote (x, c):

1. microscopic Bachelier branch: c <= 1e-6 (1 + 1e-12) and |x| <= 1e-8;
2. tiny near-ATM guard: c <= 5e-4 and |x| < 0.01, seeded with the smaller
   of sqrt(x^2 + 2 pi c^2) and the L3 lower bound, then refined;
3. Choi L3 seed (repaired only when it breaks down) and three refinement
   steps on the smaller tail;
4. optional polish against the expanded evaluator for prices at or below
   the configured cutoff.

If any refinement iterate leaves [v0 / ITERATE_BAND, v0 * ITERATE_BAND] the
seed is returned instead.
"""

import math
from dataclasses import dataclass
from typing import Literal, Optional, Tuple

from .normalize import beta_from_c, normalize, vol_from_total
from .polish import jackel_newton_polish, resolve_cutoff
from .pricing import coeff_a
from .refine import refine3
from .seed import choi_l3, near_atm_seed
from .specfun import DBL_EPSILON, LN_TWO_PI, SQRT_TWO_PI, norm_pdf
from .utils.exceptions import ArbitrageViolation, InvalidInput
from .utils.logger import get_logger
from .utils.validators import RawQuote

logger = get_logger("dispatch")

BranchTag = Literal[
    "tiny_near_atm",
    "microscopic_deep_tail",
    "microscopic_rational",
    "microscopic_zero_limit",
    "l3_seed",
    "seed_repaired",
    "lower_chebyshev",
    "upper_halley",
    "polished",
]

MICROSCOPIC_PRICE = 1e-6 * (1.0 + 1e-12)
MICROSCOPIC_MONEYNESS = 1e-8
TINY_PRICE = 5e-4
TINY_MONEYNESS = 0.01
ITERATE_BAND = 1e3

DEEP_TAIL_LOG_RATIO = 20.0
DEEP_TAIL_MIN_A = 4.0

_BLACK_CORRECTIONS = 2
_MILLS_MAX_ITER = 100
_BRACKET_MAX_EXPANSIONS = 64


@dataclass(frozen=True, slots=True)
class SolveResult:
    """Solver output for one normalized quote."""

    total_vol: float
    implied_vol: float
    branch_path: Tuple[BranchTag, ...]
    trace: Tuple[float, ...]
    polished: bool = False


# ============================================================================
# Microscopic branch: Bachelier limit
# ============================================================================


def bachelier_price(m: float, v: float) -> float:
    """Bachelier integral I0 = v phi(a) - m Phi(-a) with a = m/v.

    Written as v phi(a) a(-a), so nothing is subtracted.
    """
    if v <= 0.0:
        return 0.0
    a = m / v
    return v * norm_pdf(a) * coeff_a(-a)


def _log_scaled_mills(a: float) -> float:
    """ln(I0/m) as a function of a = m/v: -a^2/2 - ln(2 pi)/2 + ln(a(-a)/a)."""
    return -0.5 * a * a - 0.5 * LN_TWO_PI + math.log(coeff_a(-a) / a)


def _solve_scaled_mills(
    log_target: float, a_start: float, lo: float, hi: float
) -> Optional[float]:
    """Root of ln(I0/m)(a) = log_target, bracketed in [lo, hi].

    The left side decreases strictly in a with derivative -1/(a a(-a)).
    Newton steps that leave the bracket are replaced by bisection.
    """
    a = min(max(a_start, lo), hi)
    for _ in range(_MILLS_MAX_ITER):
        f = _log_scaled_mills(a) - log_target
        if f == 0.0:
            return a
        if f > 0.0:
            lo = a
        else:
            hi = a
        slope = -1.0 / (a * coeff_a(-a))
        a_next = a - f / slope
        if not lo < a_next < hi:
            a_next = 0.5 * (lo + hi)
        if abs(a_next - a) <= 4.0 * DBL_EPSILON * a:
            return a_next
        a = a_next
    return a if math.isfinite(a) else None


def _bracket_mills(log_target: float, a0: float) -> Optional[Tuple[float, float]]:
    lo, hi = a0, a0
    for _ in range(_BRACKET_MAX_EXPANSIONS):
        if _log_scaled_mills(lo) > log_target:
            break
        lo *= 0.5
        if lo == 0.0:
            return None
    else:
        return None
    for _ in range(_BRACKET_MAX_EXPANSIONS):
        if _log_scaled_mills(hi) < log_target:
            break
        hi *= 2.0
    else:
        return None
    return lo, hi


def bachelier_iv(beta: float, m: float) -> float:
    """Normal-model total volatility v with I0(m, v) = beta.

    ATM this is sqrt(2 pi) beta. Otherwise an analytic start in a = m/v
    (the ATM expansion for small a, the tail asymptote a^2/2 + 3 ln a for
    large a) is refined by safeguarded Newton on ln I0.

    Args:
        beta: Sqrt-forward normalized price, beta > 0
        m: Absolute log-moneyness, m >= 0

    Returns:
        Total volatility; 0.0 if no positive root was found
    """
    if m == 0.0:
        return SQRT_TWO_PI * beta
    log_target = math.log(beta) - math.log(m)

    v_atm = (beta + 0.5 * m) * SQRT_TWO_PI
    a0 = m / v_atm
    if a0 > 1.0:
        rhs = -log_target - 0.5 * LN_TWO_PI
        a0 = math.sqrt(max(2.0 * rhs, 1.0))
        for _ in range(3):
            a0 = math.sqrt(max(2.0 * (rhs - 3.0 * math.log(a0)), 1.0))

    bracket = _bracket_mills(log_target, a0)
    if bracket is None:
        return 0.0
    a = _solve_scaled_mills(log_target, a0, *bracket)
    if a is None or not a > 0.0:
        return 0.0
    return m / a


def deep_tail_solve(beta: float, m: float) -> Optional[float]:
    """Total volatility from the scaled Mills-ratio deep-tail equation.

    Solves ln(beta/m) = -a^2/2 - ln(2 pi)/2 + ln(1/a - sqrt(pi/2) erfcx(a/sqrt 2))
    on a in [4, 2 a0] with a0 = sqrt(-2 ln(beta/m) - ln 2 pi).

    Returns:
        v = m/a, or None when the root does not satisfy m/v > 4
    """
    log_target = math.log(beta) - math.log(m)
    a0 = math.sqrt(max(-2.0 * log_target - LN_TWO_PI, 0.0))
    lo, hi = DEEP_TAIL_MIN_A, max(2.0 * a0, 2.0 * DEEP_TAIL_MIN_A)
    if not (_log_scaled_mills(lo) > log_target > _log_scaled_mills(hi)):
        return None
    a = _solve_scaled_mills(log_target, a0, lo, hi)
    if a is None or not a > DEEP_TAIL_MIN_A:
        return None
    return m / a


def _black_bachelier(m: float, v: float) -> Tuple[float, float]:
    """beta_Bl = I0 - I2/8 + I4/128 and the sqrt-forward vega phi(a) e^(-v^2/8)."""
    a = m / v
    pdf = norm_pdf(a)
    i0 = v * pdf * coeff_a(-a)
    i2 = (v * v * v * pdf - m * m * i0) / 3.0
    i4 = (v * v * v * v * v * pdf - m * m * i2) / 5.0
    return i0 - i2 / 8.0 + i4 / 128.0, pdf * math.exp(-0.125 * v * v)


def microscopic_bachelier(x: float, c: float) -> Tuple[float, BranchTag]:
    """Solve in the Bachelier limit for microscopic prices near the money.

    Args:
        x: Log-moneyness with |x| <= 1e-8
        c: Normalized price, at most about 1e-6

    Returns:
        Tuple of total volatility and the branch tag that produced it
    """
    beta = beta_from_c(c, x)
    m = -x
    if m > 0.0 and math.log(m) - math.log(beta) > DEEP_TAIL_LOG_RATIO:
        v = deep_tail_solve(beta, m)
        if v is not None:
            return v, "microscopic_deep_tail"

    v = bachelier_iv(beta, m)
    if math.isfinite(v) and v > 0.0:
        for _ in range(_BLACK_CORRECTIONS):
            model, vega = _black_bachelier(m, v)
            if not vega > 0.0:
                break
            v_next = v + (beta - model) / vega
            if not (math.isfinite(v_next) and v_next > 0.0):
                break
            v = v_next
        return v, "microscopic_rational"

    logger.debug(
        "Microscopic branch fell through to the zero-volatility limit",
        extra={"component": "dispatch", "operation": "microscopic", "x": x, "c": c},
    )
    return 0.0, "microscopic_zero_limit"


# ============================================================================
# Solver entry points
# ============================================================================


def _check_normalized(x: float, c: float, expiry: float) -> None:
    if not (math.isfinite(x) and math.isfinite(c) and math.isfinite(expiry)):
        raise InvalidInput("x, c and expiry must be finite", "x", x)
    if x > 0.0:
        raise InvalidInput(f"log-moneyness must be <= 0, got {x!r}", "x", x)
    if not expiry > 0.0:
        raise InvalidInput(f"expiry must be positive, got {expiry!r}", "expiry", expiry)
    if not 0.0 < c < 1.0:
        raise ArbitrageViolation(
            f"normalized price {c!r} outside (0, 1)", price=c, lower=0.0, upper=1.0
        )


def solve(
    x: float,
    c: float,
    expiry: float = 1.0,
    polish: bool = False,
    polish_cutoff: Optional[str] = None,
) -> SolveResult:
    """Invert a normalized OTM price to total and annualized volatility.

    Args:
        x: Log-moneyness ln(F*/K*), x <= 0
        c: Normalized OTM price in (0, 1)
        expiry: Time to expiry in years, used only for sigma = v/sqrt(T)
        polish: Apply the Newton polish when c is within the cutoff
        polish_cutoff: "half" or "cJ"; the configured band by default

    Returns:
        SolveResult with the branch tags in the order they were taken

    Raises:
        InvalidInput: For non-finite input or x > 0
        ArbitrageViolation: If c is outside (0, 1)
    """
    _check_normalized(x, c, expiry)

    if c <= MICROSCOPIC_PRICE and abs(x) <= MICROSCOPIC_MONEYNESS and x <= 0.0:
        v, tag = microscopic_bachelier(x, c)
        return SolveResult(v, vol_from_total(v, expiry), (tag,), (v,))

    path: list[BranchTag] = []
    if c <= TINY_PRICE and abs(x) < TINY_MONEYNESS:
        # sqrt(x^2 + 2 pi c^2) tends to |x| as c -> 0, far above the root.
        v0 = min(near_atm_seed(x, c), choi_l3(x, c).v0)
        path.append("tiny_near_atm")
    else:
        seed = choi_l3(x, c)
        v0 = seed.v0
        path.append("seed_repaired" if seed.repaired else "l3_seed")

    trace = refine3(x, c, v0)
    path.append("lower_chebyshev" if trace.branch == "lower" else "upper_halley")
    v = trace.final
    if not all(
        math.isfinite(u) and v0 / ITERATE_BAND <= u <= v0 * ITERATE_BAND
        for u in trace.iterates
    ):
        logger.debug(
            "Refinement left the seed band, keeping the seed",
            extra={"component": "dispatch", "operation": "solve", "x": x, "c": c},
        )
        v = v0

    polished = False
    if polish:
        cutoff = resolve_cutoff(polish_cutoff)
        v_polished, report = jackel_newton_polish(x, v, c, cutoff)
        if report.applied:
            v = v_polished
            polished = True
            path.append("polished")

    return SolveResult(
        v, vol_from_total(v, expiry), tuple(path), tuple(trace.iterates), polished
    )


def implied_total_vol(
    x: float, c: float, polish: bool = False, polish_cutoff: Optional[str] = None
) -> float:
    """Total volatility v = sigma sqrt(T) for a normalized quote."""
    return solve(x, c, 1.0, polish, polish_cutoff).total_vol


def implied_vol_from_quote(quote: RawQuote, polish: bool = False) -> SolveResult:
    """Normalize a raw call/put quote and solve it.

    Raises:
        ArbitrageViolation: If the price is outside the no-arbitrage band
        InvalidInput: For non-finite fields
    """
    nq = normalize(quote)
    return solve(nq.x, nq.c, nq.expiry, polish)
