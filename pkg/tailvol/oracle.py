#!/usr/bin/env python3
"""Multiprecision reference values for prices, implied volatilities and the
special functions.

The Black difference Phi(d1) - e^(-x) Phi(d2) cancels badly in the tails, so
every evaluation measures the digits it lost. When too few remain the call
raises PrecisionLoss internally and tenacity retries it with more digits.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Union

from mpmath import mp, mpf
from tenacity import (
    Retrying,
    before_sleep_log,
    retry_if_exception_type,
    stop_after_attempt,
)

from .config import (
    ORACLE_DEEP_DIGITS,
    ORACLE_DIGITS,
    ORACLE_GUARD_DIGITS,
    ORACLE_MAX_ESCALATIONS,
)
from .specfun import inv_norm_cdf
from .utils.exceptions import DomainError, NoConvergence, PrecisionLoss
from .utils.floats import ulp_up
from .utils.logger import get_logger

logger = get_logger("oracle")

MIN_DIGITS = 50

Real = Union[float, int, str, mpf]

_BISECTION_RELATIVE_WIDTH = mpf("1e-10")
_MAX_BISECTIONS = 400
_MAX_NEWTON = 60


@dataclass(frozen=True)
class PrecisionContext:
    """Working decimal precision of an oracle evaluation."""

    digits: int = ORACLE_DIGITS
    guard_digits: int = ORACLE_GUARD_DIGITS

    def __post_init__(self):
        if self.digits < MIN_DIGITS:
            raise DomainError(
                f"oracle precision must be at least {MIN_DIGITS} digits", self.digits
            )


def deep_context() -> PrecisionContext:
    """Context for the deep-tail cross-checks."""
    return PrecisionContext(digits=ORACLE_DEEP_DIGITS)


def _context(ctx: Optional[PrecisionContext]) -> PrecisionContext:
    return ctx if ctx is not None else PrecisionContext()


def _escalation() -> Retrying:
    return Retrying(
        stop=stop_after_attempt(ORACLE_MAX_ESCALATIONS + 1),
        retry=retry_if_exception_type(PrecisionLoss),
        before_sleep=before_sleep_log(logger, logging.DEBUG),
        reraise=True,
    )


def _black_at(x: mpf, v: mpf, dps: int, required: int) -> mpf:
    with mp.workdps(dps):
        h = x / v
        t = v / 2
        first = mp.ncdf(h + t)
        second = mp.exp(-x) * mp.ncdf(h - t)
        c = first - second
        if c <= 0:
            raise PrecisionLoss(
                f"Black difference vanished at {dps} digits",
                digits=dps,
                lost_digits=dps,
            )
        lost = max(int(mp.ceil(mp.log10(first / c))), 0)
        if dps - lost < required:
            raise PrecisionLoss(
                f"{lost} digits cancelled at {dps} digits", digits=dps, lost_digits=lost
            )
        return +c


def hp_price(x: Real, v: Real, ctx: Optional[PrecisionContext] = None) -> mpf:
    """Normalized Black price Phi(h + t) - e^(-x) Phi(h - t) in multiprecision.

    Args:
        x: Log-moneyness, x <= 0; doubles are taken exactly
        v: Total volatility, v > 0
        ctx: Precision; the result carries at least ``ctx.digits`` digits

    Returns:
        The price as an mpmath float

    Raises:
        PrecisionLoss: If the escalation budget is exhausted
    """
    ctx = _context(ctx)
    dps = ctx.digits + ctx.guard_digits
    with mp.workdps(dps):
        x_mp, v_mp = mpf(x), mpf(v)
    for attempt in _escalation():
        with attempt:
            try:
                return _black_at(x_mp, v_mp, dps, ctx.digits)
            except PrecisionLoss as exc:
                dps += exc.lost_digits + ctx.guard_digits
                raise


def hp_log_price(x: Real, v: Real, ctx: Optional[PrecisionContext] = None) -> mpf:
    ctx = _context(ctx)
    c = hp_price(x, v, ctx)
    with mp.workdps(ctx.digits + ctx.guard_digits):
        return mp.log(c)


def _hp_vega(x: mpf, v: mpf) -> mpf:
    return mp.npdf(x / v + v / 2)


def hp_implied_vol(x: Real, c: Real, ctx: Optional[PrecisionContext] = None) -> mpf:
    """Reference total volatility for a normalized price.

    A geometric bisection brackets the root to relative width 1e-10, then
    Newton on ln c(v) runs to ``digits - 10`` digits.

    Raises:
        DomainError: If c is not in (0, 1)
        NoConvergence: If the iteration budget runs out
    """
    ctx = _context(ctx)
    with mp.workdps(ctx.digits + ctx.guard_digits):
        x_mp, c_mp = mpf(x), mpf(c)
        if not 0 < c_mp < 1:
            raise DomainError(f"price must lie in (0, 1), got {c!r}", c)
        log_target = mp.log(c_mp)

        lo, hi = mpf(1), mpf(1)
        for _ in range(_MAX_BISECTIONS):
            if hp_price(x_mp, lo, ctx) < c_mp:
                break
            lo /= 2
        for _ in range(_MAX_BISECTIONS):
            if hp_price(x_mp, hi, ctx) > c_mp:
                break
            hi *= 2

        iterations = 0
        while hi / lo - 1 > _BISECTION_RELATIVE_WIDTH:
            iterations += 1
            if iterations > _MAX_BISECTIONS:
                raise NoConvergence(
                    "bracketing did not narrow", iterations, float(hi / lo - 1)
                )
            mid = mp.sqrt(lo * hi)
            if hp_price(x_mp, mid, ctx) < c_mp:
                lo = mid
            else:
                hi = mid

        v = mp.sqrt(lo * hi)
        tolerance = mpf(10) ** -(ctx.digits - 10)
        residual = mpf(1)
        for _ in range(_MAX_NEWTON):
            price = hp_price(x_mp, v, ctx)
            residual = mp.log(price) - log_target
            delta = residual * price / _hp_vega(x_mp, v)
            v -= delta
            if abs(delta) <= tolerance * v:
                return +v
        raise NoConvergence(
            f"Newton did not converge for x={x!r}, c={c!r}",
            _MAX_NEWTON,
            float(residual),
        )


def hp_norm_cdf(z: Real, digits: int = ORACLE_DIGITS) -> mpf:
    with mp.workdps(digits):
        return mp.ncdf(mpf(z))


def hp_erfcx(z: Real, digits: int = ORACLE_DIGITS) -> mpf:
    """exp(z^2) erfc(z) in multiprecision."""
    with mp.workdps(digits):
        z_mp = mpf(z)
        return mp.exp(z_mp * z_mp) * mp.erfc(z_mp)


def hp_coeff_a(h: Real, digits: int = ORACLE_DIGITS) -> mpf:
    """1 + h Phi(h)/phi(h), with enough extra digits for the tail cancellation."""
    with mp.workdps(digits + 20):
        h_mp = mpf(h)
        return 1 + h_mp * mp.ncdf(h_mp) / mp.npdf(h_mp)


def hp_inv_norm_cdf(p: Real, digits: int = ORACLE_DIGITS) -> mpf:
    """Newton on the multiprecision normal cdf, started from the double quantile."""
    with mp.workdps(digits + 10):
        p_mp = mpf(p)
        if not 0 < p_mp < 1:
            raise DomainError(f"probability must lie in (0, 1), got {p!r}", p)
        z = mpf(inv_norm_cdf(float(p_mp)))
        tolerance = mpf(10) ** -digits
        for _ in range(_MAX_NEWTON):
            delta = (mp.ncdf(z) - p_mp) / mp.npdf(z)
            z -= delta
            if abs(delta) <= tolerance * max(1, abs(z)):
                return +z
    raise NoConvergence(f"quantile did not converge for p={p!r}", _MAX_NEWTON)


def to_double(value: mpf) -> float:
    """Round a multiprecision value to the nearest double."""
    return float(value)


def ulp_error(v_hat: float, v_ref: float) -> float:
    """|v_hat - v_ref| in units of the spacing just above ``v_ref``.

    Raises:
        DomainError: If v_ref is not finite and positive
    """
    if not (math.isfinite(v_ref) and v_ref > 0.0):
        raise DomainError(
            f"reference must be finite and positive, got {v_ref!r}", v_ref
        )
    return abs(v_hat - v_ref) / ulp_up(v_ref)
