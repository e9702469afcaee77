#!/usr/bin/env python3
"""Reduction of call/put quotes to the normalized OTM representation.

Every admissible quote becomes an undiscounted OTM call on
F* = min(F, K) struck at K* = max(F, K), described by

    x = ln(F*/K*) <= 0,    c = C_OTM / F* in (0, 1).
"""

import math
from dataclasses import dataclass

from .utils.exceptions import ArbitrageViolation, InvalidInput
from .utils.validators import RawQuote

# Upper edge of the admissible band: c >= 1 - 2**-52 is rejected.
C_UPPER_LIMIT = 1.0 - 2.0**-52


@dataclass(frozen=True, slots=True)
class NormalizedQuote:
    """Solver input after OTM reduction."""

    x: float
    ex: float
    c: float
    expiry: float
    f_star: float
    k_star: float


def _otm_price(q: RawQuote) -> float:
    f, k, p = q.forward, q.strike, q.price
    if q.option_kind == "call":
        # Call is OTM iff F <= K; otherwise remove intrinsic F - K.
        return p if f <= k else p - (f - k)
    return p if f >= k else p - (k - f)


def normalize(q: RawQuote) -> NormalizedQuote:
    """Reduce a quote to (x, e^x, c, T).

    Args:
        q: Validated raw quote

    Returns:
        NormalizedQuote with intrinsic value removed

    Raises:
        InvalidInput: If any field is non-finite
        ArbitrageViolation: If the OTM price is outside (0, F*)
    """
    for name in ("forward", "strike", "expiry", "price"):
        value = getattr(q, name)
        if not math.isfinite(value):
            raise InvalidInput(f"{name} must be finite", name, value)

    f_star = min(q.forward, q.strike)
    k_star = max(q.forward, q.strike)
    c_otm = _otm_price(q)

    if c_otm <= 0.0:
        raise ArbitrageViolation(
            f"OTM price {c_otm!r} is not positive",
            price=q.price,
            lower=0.0,
            upper=f_star,
        )

    c = c_otm / f_star
    if c >= C_UPPER_LIMIT:
        raise ArbitrageViolation(
            f"OTM price {c_otm!r} reaches the forward bound {f_star!r}",
            price=q.price,
            lower=0.0,
            upper=f_star,
        )

    ex = f_star / k_star
    return NormalizedQuote(
        x=math.log(ex), ex=ex, c=c, expiry=q.expiry, f_star=f_star, k_star=k_star
    )


def beta_from_c(c: float, x: float) -> float:
    """Sqrt-forward normalized price beta = c * e^(x/2)."""
    return c * math.exp(0.5 * x)


def c_from_beta(beta: float, x: float) -> float:
    return beta / math.exp(0.5 * x)


def vol_from_total(v: float, expiry: float) -> float:
    """Annualized volatility sigma = v / sqrt(T)."""
    return v / math.sqrt(expiry)
