#!/usr/bin/env python3
"""Double-precision special functions: erf, erfc, erfcx, normal pdf/cdf/quantile.

The erf family follows Cody's rational Chebyshev kernels (three argument
ranges); the middle-range rational is evaluated with compensated Horner sums.
Above ``erfcx_switch_point`` erfcx switches to the Laplace continued
fraction. The inverse normal cdf is a central/tail rational approximation
refined by one Halley step against :func:`norm_cdf`.
"""

import math
import sys

from .config import ERFCX_SWITCH_POINT, INVCDF_TAIL_CUT
from .utils.exceptions import DomainError

DBL_EPSILON = sys.float_info.epsilon
DBL_MIN = sys.float_info.min
SQRT_TWO = math.sqrt(2.0)
INV_SQRT_TWO = 1.0 / SQRT_TWO
SQRT_PI = math.sqrt(math.pi)
INV_SQRT_PI = 5.6418958354775628695e-1
SQRT_TWO_PI = math.sqrt(2.0 * math.pi)
INV_SQRT_TWO_PI = 1.0 / SQRT_TWO_PI
SQRT_PI_OVER_TWO = math.sqrt(math.pi / 2.0)
LN_TWO = math.log(2.0)
LN_TWO_PI = math.log(2.0 * math.pi)

# Cody's range limits for IEEE double.
_THRESH = 0.46875
_XSMALL = 1.11e-16
_XBIG = 26.543
_XHUGE = 6.71e7
_XMAX = 2.53e307
_XNEG = -26.628

_A = (
    3.16112374387056560e00,
    1.13864154151050156e02,
    3.77485237685302021e02,
    3.20937758913846947e03,
    1.85777706184603153e-1,
)
_B = (
    2.36012909523441209e01,
    2.44024637934444173e02,
    1.28261652607737228e03,
    2.84423683343917062e03,
)
_C = (
    5.64188496988670089e-1,
    8.88314979438837594e00,
    6.61191906371416295e01,
    2.98635138197400131e02,
    8.81952221241769090e02,
    1.71204761263407058e03,
    2.05107837782607147e03,
    1.23033935479799725e03,
    2.15311535474403846e-8,
)
_D = (
    1.57449261107098347e01,
    1.17693950891312499e02,
    5.37181101862009858e02,
    1.62138957456669019e03,
    3.29079923573345963e03,
    4.36261909014324716e03,
    3.43936767414372164e03,
    1.23033935480374942e03,
)
_P = (
    3.05326634961232344e-1,
    3.60344899949804439e-1,
    1.25781726111229246e-1,
    1.60837851487422766e-2,
    6.58749161529837803e-4,
    1.63153871373020978e-2,
)
_Q = (
    2.56852019228982242e00,
    1.87295284992346725e00,
    5.27905102951428412e-1,
    6.05183413124413191e-2,
    2.33520497626869185e-3,
)

# Laplace continued-fraction depth; converged to double precision for y >= 10.
_CF_DEPTH = 16

# Central/tail rational for the normal quantile.
_ICDF_A = (
    -3.969683028665376e01,
    2.209460984245205e02,
    -2.759285104469687e02,
    1.383577518672690e02,
    -3.066479806614716e01,
    2.506628277459239e00,
)
_ICDF_B = (
    -5.447609879822406e01,
    1.615858368580409e02,
    -1.556989798598866e02,
    6.680131188771972e01,
    -1.328068155288572e01,
)
_ICDF_C = (
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e00,
    -2.549732539343734e00,
    4.374664141464968e00,
    2.938163982698783e00,
)
_ICDF_D = (
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e00,
    3.754408661907416e00,
)


_C_POLY = (_C[8],) + _C[:8]
_D_POLY = (1.0,) + _D

# Dekker split constant, 2**27 + 1.
_SPLITTER = 134217729.0


def _two_sum(a: float, b: float) -> tuple[float, float]:
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _two_prod(a: float, b: float) -> tuple[float, float]:
    p = a * b
    c = _SPLITTER * a
    a_hi = c - (c - a)
    a_lo = a - a_hi
    c = _SPLITTER * b
    b_hi = c - (c - b)
    b_lo = b - b_hi
    return p, a_lo * b_lo - (((p - a_hi * b_hi) - a_lo * b_hi) - a_hi * b_lo)


def _comp_horner(coeffs: tuple[float, ...], y: float) -> float:
    """Compensated Horner scheme, highest coefficient first.

    The rounding error of every multiply and add is carried in a second
    Horner sum, so for positive coefficients and y > 0 the result is within
    about one rounding of the exact polynomial value.
    """
    s = coeffs[0]
    err = 0.0
    for a in coeffs[1:]:
        p, p_err = _two_prod(s, y)
        s, s_err = _two_sum(p, a)
        err = err * y + (p_err + s_err)
    return s + err


def _exp_neg_square(y: float) -> float:
    """exp(-y*y) with y split at 1/16 so the square is formed exactly."""
    ysq = math.trunc(y * 16.0) / 16.0
    dlt = (y - ysq) * (y + ysq)
    return math.exp(-ysq * ysq) * math.exp(-dlt)


def _exp_neg_half_square(z: float) -> float:
    """exp(-z*z/2) using the same split as :func:`_exp_neg_square`."""
    zsq = math.trunc(z * 16.0) / 16.0
    dlt = (z - zsq) * (z + zsq)
    return math.exp(-0.5 * zsq * zsq) * math.exp(-0.5 * dlt)


def _erfcx_continued_fraction(y: float) -> float:
    f = y
    for k in range(_CF_DEPTH, 0, -1):
        f = y + 0.5 * k / f
    return INV_SQRT_PI / f


def _calerf(x: float, jint: int) -> float:
    """Cody's three-range kernel. jint: 0 erf, 1 erfc, 2 erfcx."""
    y = abs(x)
    if y <= _THRESH:
        ysq = y * y if y > _XSMALL else 0.0
        xnum = _A[4] * ysq
        xden = ysq
        for i in range(3):
            xnum = (xnum + _A[i]) * ysq
            xden = (xden + _B[i]) * ysq
        result = x * (xnum + _A[3]) / (xden + _B[3])
        if jint != 0:
            result = 1.0 - result
        if jint == 2:
            result = math.exp(ysq) * result
        return result

    if y <= 4.0:
        result = _comp_horner(_C_POLY, y) / _comp_horner(_D_POLY, y)
        if jint != 2:
            result = _exp_neg_square(y) * result
    else:
        if y >= _XBIG and (jint != 2 or y >= _XMAX):
            result = 0.0
        elif jint == 2 and y >= _XHUGE:
            result = INV_SQRT_PI / y
        else:
            ysq = 1.0 / (y * y)
            xnum = _P[5] * ysq
            xden = ysq
            for i in range(4):
                xnum = (xnum + _P[i]) * ysq
                xden = (xden + _Q[i]) * ysq
            result = ysq * (xnum + _P[4]) / (xden + _Q[4])
            result = (INV_SQRT_PI - result) / y
            if jint != 2:
                result = _exp_neg_square(y) * result

    # Fix up negative arguments and the erf case.
    if jint == 0:
        result = (0.5 - result) + 0.5
        if x < 0.0:
            result = -result
    elif jint == 1:
        if x < 0.0:
            result = 2.0 - result
    elif x < 0.0:
        if x < _XNEG:
            result = math.inf
        else:
            ysq = math.trunc(x * 16.0) / 16.0
            dlt = (x - ysq) * (x + ysq)
            y = math.exp(ysq * ysq) * math.exp(dlt)
            result = (y + y) - result
    return result


def erf(x: float) -> float:
    return _calerf(x, 0)


def erfc(x: float) -> float:
    return _calerf(x, 1)


def erfcx(z: float) -> float:
    """Scaled complementary error function exp(z**2) * erfc(z).

    Args:
        z: Finite argument

    Returns:
        Positive value; +inf once exp(z**2) overflows for very negative z
    """
    if z > ERFCX_SWITCH_POINT:
        return _erfcx_continued_fraction(z)
    return _calerf(z, 2)


def norm_pdf(z: float) -> float:
    return INV_SQRT_TWO_PI * _exp_neg_half_square(z)


def norm_cdf(z: float) -> float:
    """Standard normal cdf.

    In the lower tail the Gaussian factor is formed from ``z`` itself, so
    the rounding of z/sqrt(2) only enters through the slowly varying erfcx.
    """
    if z < -_THRESH * SQRT_TWO:
        return 0.5 * _exp_neg_half_square(z) * erfcx(-z * INV_SQRT_TWO)
    return 0.5 * erfc(-z * INV_SQRT_TWO)


def _inv_norm_cdf_lower(p: float) -> float:
    if p < INVCDF_TAIL_CUT:
        q = math.sqrt(-2.0 * math.log(p))
        c, d = _ICDF_C, _ICDF_D
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) / (
            (((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0
        )
    else:
        q = p - 0.5
        r = q * q
        a, b = _ICDF_A, _ICDF_B
        x = (
            (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5])
            * q
            / (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0)
        )

    # One Halley correction brings the rational to full accuracy.
    pdf = norm_pdf(x)
    if pdf > 0.0:
        u = (norm_cdf(x) - p) / pdf
        step = u / (1.0 + 0.5 * x * u)
        if math.isfinite(step):
            x -= step
    return x


def inv_norm_cdf(p: float) -> float:
    """Inverse of the standard normal cdf.

    Args:
        p: Probability strictly inside (0, 1)

    Returns:
        z with norm_cdf(z) == p to working accuracy

    Raises:
        DomainError: If p is not in the open unit interval
    """
    if not 0.0 < p < 1.0:
        raise DomainError(f"inv_norm_cdf requires 0 < p < 1, got {p!r}", p)
    if p > 0.5:
        # 1 - p is exact on [0.5, 1].
        return -_inv_norm_cdf_lower(1.0 - p)
    return _inv_norm_cdf_lower(p)
