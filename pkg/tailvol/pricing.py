#!/usr/bin/env python3
"""Black price evaluation paths for the normalized OTM call.

With h = x/v and t = v/2 the normalized call price is

    c(x, v) = Phi(h + t) - e^(-x) * Phi(h - t),

and the sqrt-forward price is beta = c * e^(x/2). Four evaluation paths are
provided:

* ``price_cdf``: the textbook formula.
* ``log_price_lower``: ln c through the erfcx pair N+, N-. It stays finite
  after c itself underflows. The spread N+ - N- is taken from the region
  series or an erf combination wherever the literal difference cancels.
* ``log_gap_upper``: ln(1 - c) through the erfcx pair M+, M-.
* ``price_expanded``: the branched reference evaluator for beta. It uses an
  asymptotic series in Region I, a small-t series in Region II, and Cody
  erfc/erfcx combinations elsewhere.
"""

import math
import sys
from dataclasses import dataclass
from enum import Enum
from typing import Literal

from .specfun import (
    DBL_EPSILON,
    INV_SQRT_TWO,
    INV_SQRT_TWO_PI,
    LN_TWO,
    LN_TWO_PI,
    SQRT_PI_OVER_TWO,
    SQRT_TWO,
    erf,
    erfc,
    erfcx,
    norm_cdf,
)
from .utils.exceptions import DegenerateDifference, InvalidInput

Branch = Literal["lower", "upper"]

SIXTEENTH_ROOT_DBL_EPSILON = math.sqrt(math.sqrt(math.sqrt(math.sqrt(DBL_EPSILON))))

# Dispatcher constants of the expanded evaluator.
ETA = -13.0
TAU = 2.0 * SIXTEENTH_ROOT_DBL_EPSILON
RHO = 0.46875

# Price level up to which the small-t expansion is trusted as a polish target.
C_J = erf(SQRT_TWO * SIXTEENTH_ROOT_DBL_EPSILON)

# exp() of anything below this is subnormal, above the upper one it overflows.
_LOG_DBL_MIN = math.log(sys.float_info.min)
_LOG_DBL_MAX = math.log(sys.float_info.max)

_COEFF_A_TAIL_SWITCH = -10.0
_MILLS_CF_DEPTH = 40

_OMEGA_MAX_TERMS = 18
_HALF_ULP = 2.0**-53

_TWO_OVER_SQRT_TWO_PI = 2.0 * INV_SQRT_TWO_PI


class RegionTag(str, Enum):
    """Evaluation region of the expanded evaluator in the (x, s) plane."""

    REGION_I = "RegionI"
    REGION_II = "RegionII"
    CODY = "Cody"


@dataclass(frozen=True, slots=True)
class HalfCoords:
    h: float
    t: float


@dataclass(frozen=True, slots=True)
class TailObjectiveEval:
    """One evaluation of a tail-log objective.

    For the lower branch ``log_value`` is ln c, (n_plus, n_minus) are
    (N+, N-) and ``spread`` is N+ - N-. For the upper branch it is
    ln(1 - c) with (M+, M-) and ``spread`` = M+ + M-.
    """

    branch: Branch
    log_value: float
    n_plus: float
    n_minus: float
    spread: float
    coords: HalfCoords


def half_coords(x: float, v: float) -> HalfCoords:
    return HalfCoords(h=x / v, t=0.5 * v)


# ============================================================================
# Textbook and erfcx/log paths
# ============================================================================


def price_cdf(x: float, v: float) -> float:
    """Textbook normalized Black price, clamped to [0, 1]."""
    h = x / v
    t = 0.5 * v
    lower = norm_cdf(h - t)
    discounted = 0.0
    if lower > 0.0:
        log_discounted = math.log(lower) - x
        if log_discounted >= _LOG_DBL_MAX:
            return 0.0
        discounted = math.exp(log_discounted)
    c = norm_cdf(h + t) - discounted
    if not c > 0.0:
        return 0.0
    return min(c, 1.0)


def lower_spread(x: float, v: float) -> float:
    """N+ - N- without subtracting two nearly equal erfcx values.

    N+ - N- = (2/sqrt(2 pi)) beta e^((h^2 + t^2)/2), so Regions I and II
    reuse the scaled series of the expanded evaluator. In the Cody region,
    when both erfcx arguments are below RHO the difference is formed as

        e^((h^2 + t^2)/2) (2 sinh(x/2) + e^(x/2) erf(d+) - e^(-x/2) erf(d-))

    with d± = (h ± t)/sqrt(2); elsewhere the literal difference is exact
    enough.
    """
    coords = half_coords(x, v)
    h, t = coords.h, coords.t
    region = region_dispatch(x, v)
    if region is RegionTag.REGION_I:
        return _TWO_OVER_SQRT_TWO_PI * _scaled_region_one(h, t)
    if region is RegionTag.REGION_II:
        return _TWO_OVER_SQRT_TWO_PI * _scaled_region_two(h, t)
    q1 = -(h + t) * INV_SQRT_TWO
    q2 = -(h - t) * INV_SQRT_TWO
    if q1 < RHO and q2 < RHO:
        bracket = (
            2.0 * math.sinh(0.5 * x)
            + math.exp(0.5 * x) * erf(-q1)
            - math.exp(-0.5 * x) * erf(-q2)
        )
        return math.exp(0.5 * (h * h + t * t)) * bracket
    return erfcx(q1) - erfcx(q2)


def log_price_lower(x: float, v: float, literal: bool = False) -> TailObjectiveEval:
    """ln c = -(h^2 + t^2)/2 - ln 2 - x/2 + ln(N+ - N-).

    Args:
        x: Log-moneyness, x <= 0
        v: Total volatility
        literal: Subtract the two erfcx values directly instead of using
            :func:`lower_spread`

    Raises:
        DegenerateDifference: If N+ - N- does not come out positive
    """
    coords = half_coords(x, v)
    h, t = coords.h, coords.t
    n_plus = erfcx(-(h + t) * INV_SQRT_TWO)
    n_minus = erfcx(-(h - t) * INV_SQRT_TWO)
    if literal or not math.isfinite(n_plus):
        diff = n_plus - n_minus
    else:
        diff = lower_spread(x, v)
    if not diff > 0.0:
        raise DegenerateDifference(
            f"erfcx difference cancelled at x={x!r}, v={v!r}", x=x, v=v
        )
    if math.isfinite(diff):
        log_value = -0.5 * (h * h + t * t) - LN_TWO - 0.5 * x + math.log(diff)
    else:
        # N+ overflowed: c is within rounding of 1.
        log_value = math.log(price_cdf(x, v))
    return TailObjectiveEval("lower", log_value, n_plus, n_minus, diff, coords)


def log_gap_upper(x: float, v: float) -> TailObjectiveEval:
    """ln(1 - c) = -(h + t)^2/2 - ln 2 + ln(M+ + M-)."""
    coords = half_coords(x, v)
    h, t = coords.h, coords.t
    d1 = h + t
    m_plus = erfcx(d1 * INV_SQRT_TWO)
    m_minus = erfcx(-(h - t) * INV_SQRT_TWO)
    total = m_plus + m_minus
    if math.isfinite(total):
        log_value = -0.5 * d1 * d1 - LN_TWO + math.log(total)
    else:
        # M+ overflowed: c is negligible next to 1.
        log_value = math.log1p(-price_cdf(x, v))
    return TailObjectiveEval("upper", log_value, m_plus, m_minus, total, coords)


# ============================================================================
# Expanded evaluator
# ============================================================================


def region_dispatch(x: float, s: float) -> RegionTag:
    """Select the expanded-evaluator region; Region I is tested first."""
    if x < ETA * s and s * (0.5 * s - (TAU + 0.5 + ETA)) + x < 0.0:
        return RegionTag.REGION_I
    if s * (s - 2.0 * TAU) - x / ETA < 0.0:
        return RegionTag.REGION_II
    return RegionTag.CODY


def vega_sqrtfwd(x: float, s: float) -> float:
    """d(beta)/ds = exp(-(h^2 + t^2)/2) / sqrt(2 pi)."""
    h = x / s
    t = 0.5 * s
    return INV_SQRT_TWO_PI * math.exp(-0.5 * (h * h + t * t))


def _mills_tail_fraction(z: float) -> float:
    """K(z) = 1/(z + 2/(z + 3/(z + ...))), so that Phi(-z)/phi(z) = 1/(z + K)."""
    f = z
    for k in range(_MILLS_CF_DEPTH, 1, -1):
        f = z + k / f
    return 1.0 / f


def coeff_a(h: float) -> float:
    """a(h) = 1 + h * Phi(h)/phi(h).

    For h <= -10 the literal form cancels to about 1/h^2; there
    a = K/(z + K) with z = -h and K the Mills-ratio tail fraction.
    """
    if h <= _COEFF_A_TAIL_SWITCH:
        z = -h
        k = _mills_tail_fraction(z)
        return k / (z + k)
    return 1.0 + h * SQRT_PI_OVER_TWO * erfcx(-h * INV_SQRT_TWO)


def _double_factorial(n: int) -> int:
    result = 1
    while n > 1:
        result *= n
        n -= 2
    return result


def _omega_tables() -> tuple[tuple[float, ...], tuple[tuple[float, ...], ...]]:
    """Coefficients of Omega(q, e) = sum_r f_r q^r A_r(e).

    f_r = (-1)^r (2r-1)!! and A_r(e) = 2 sum_j C(2r+1, 2j+1) e^j. These come
    from expanding both Mills ratios in Y(h+t) - Y(h-t) asymptotically.
    """
    facts = tuple(
        float((-1) ** r * _double_factorial(2 * r - 1))
        for r in range(_OMEGA_MAX_TERMS)
    )
    polys = tuple(
        tuple(float(2 * math.comb(2 * r + 1, 2 * j + 1)) for j in range(r + 1))
        for r in range(_OMEGA_MAX_TERMS)
    )
    return facts, polys


_OMEGA_FACTS, _OMEGA_POLYS = _omega_tables()


def _omega(q: float, e: float) -> float:
    total = 0.0
    q_power = 1.0
    for r in range(_OMEGA_MAX_TERMS):
        poly = _OMEGA_POLYS[r]
        a_r = poly[-1]
        for coef in reversed(poly[:-1]):
            a_r = a_r * e + coef
        term = _OMEGA_FACTS[r] * q_power * a_r
        if r > 0 and abs(term) < _HALF_ULP * abs(total):
            break
        total += term
        q_power *= q
    return total


def _scaled_region_one(h: float, t: float) -> float:
    """beta / vega in Region I: t/r Omega(q, e) with r = h^2 - t^2."""
    r = (h + t) * (h - t)
    q = (h / r) ** 2
    e = (t / h) ** 2
    return t / r * _omega(q, e)


def _region_one(x: float, s: float) -> float:
    coords = half_coords(x, s)
    h, t = coords.h, coords.t
    scaled = _scaled_region_one(h, t)
    if not scaled > 0.0:
        return 0.0
    exponent = -0.5 * (h * h + t * t)
    if exponent < _LOG_DBL_MIN:
        return math.exp(exponent - 0.5 * LN_TWO_PI + math.log(scaled))
    return INV_SQRT_TWO_PI * math.exp(exponent) * scaled


def _scaled_region_two(h: float, t: float) -> float:
    """beta / vega in Region II: t times the even series in t with a(h) weights."""
    a = coeff_a(h)
    w = h * h
    b0 = 2.0 * a
    b1 = (-1.0 + a * (3.0 + w)) / 3.0
    b2 = (-7.0 - w + a * (15.0 + w * (10.0 + w))) / 60.0
    b3 = (
        -57.0 - w * (18.0 + w) + a * (105.0 + w * (105.0 + w * (21.0 + w)))
    ) / 2520.0
    b4 = (
        -561.0
        - w * (285.0 + w * (33.0 + w))
        + a * (945.0 + w * (1260.0 + w * (378.0 + w * (36.0 + w))))
    ) / 181440.0
    b5_odd = 10395.0 + w * (17325.0 + w * (6930.0 + w * (990.0 + w * (55.0 + w))))
    b5 = -6555.0 - w * (4680.0 + w * (840.0 + w * (52.0 + w))) + a * b5_odd
    b5 /= 19958400.0
    b6_odd = 135135.0 + w * (
        270270.0 + w * (135135.0 + w * (25740.0 + w * (2145.0 + w * (78.0 + w))))
    )
    b6 = -89055.0 - w * (82845.0 + w * (20370.0 + w * (1926.0 + w * (75.0 + w))))
    b6 = (b6 + a * b6_odd) / 3113510400.0
    tt = t * t
    series = b6
    for coef in (b5, b4, b3, b2, b1, b0):
        series = series * tt + coef
    return t * series


def _region_two(x: float, s: float) -> float:
    coords = half_coords(x, s)
    h, t = coords.h, coords.t
    return INV_SQRT_TWO_PI * math.exp(-0.5 * (h * h + t * t)) * _scaled_region_two(h, t)


def _region_cody(x: float, s: float) -> float:
    coords = half_coords(x, s)
    h, t = coords.h, coords.t
    q1 = -(h + t) * INV_SQRT_TWO
    q2 = -(h - t) * INV_SQRT_TWO
    if q1 < RHO and q2 < RHO:
        two_beta = math.exp(0.5 * x) * erfc(q1) - math.exp(-0.5 * x) * erfc(q2)
    else:
        gauss = math.exp(-0.5 * (h * h + t * t))
        if q1 < RHO:
            two_beta = math.exp(0.5 * x) * erfc(q1) - gauss * erfcx(q2)
        elif q2 < RHO:
            two_beta = gauss * erfcx(q1) - math.exp(-0.5 * x) * erfc(q2)
        else:
            two_beta = gauss * (erfcx(q1) - erfcx(q2))
    return max(0.5 * two_beta, 0.0)


def price_expanded(x: float, s: float) -> float:
    """Sqrt-forward normalized price beta by the branched reference evaluator.

    Args:
        x: Log-moneyness, x <= 0
        s: Total volatility, s > 0

    Returns:
        beta = c * e^(x/2)
    """
    region = region_dispatch(x, s)
    if region is RegionTag.REGION_I:
        return _region_one(x, s)
    if region is RegionTag.REGION_II:
        return _region_two(x, s)
    return _region_cody(x, s)


def price_by_path(x: float, v: float, path: str) -> float:
    """Normalized price c from one of the three double-precision paths.

    Args:
        x: Log-moneyness, x <= 0
        v: Total volatility
        path: "cdf", "erfcxlog" or "expanded"

    Raises:
        InvalidInput: For an unknown path name
    """
    if path == "cdf":
        return price_cdf(x, v)
    if path == "erfcxlog":
        try:
            log_c = log_price_lower(x, v, literal=True).log_value
        except DegenerateDifference:
            return price_cdf(x, v)
        if log_c <= -LN_TWO:
            return math.exp(log_c)
        return -math.expm1(log_gap_upper(x, v).log_value)
    if path == "expanded":
        return price_expanded(x, v) / math.exp(0.5 * x)
    raise InvalidInput(f"Unknown pricing path: {path}", "path", path)
