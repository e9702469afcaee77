#!/usr/bin/env python3
"""Third-order refinement on the tail-log objectives.

The lower objective is g(v) = ln c(v), solved with the Euler-Chebyshev map
v + eta (1 + lambda/2). The upper objective is l(v) = ln(1 - c(v)), solved
with the Halley map v + eta / (1 - lambda/2). In both maps
eta = -F/F' and lambda = F F''/F'^2 for the residual F of the branch.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Tuple

from .pricing import Branch, TailObjectiveEval, log_gap_upper, log_price_lower
from .specfun import SQRT_TWO_PI
from .utils.exceptions import DegenerateDifference
from .utils.logger import get_logger

logger = get_logger("refine")

REFINE_STEPS = 3

_TWO_OVER_SQRT_TWO_PI = 2.0 / SQRT_TWO_PI


@dataclass(frozen=True, slots=True)
class StepDiagnostics:
    """Newton displacement and curvature parameter of one step."""

    eta: float
    lambda_: float
    branch: Branch
    v_before: float
    v_after: float
    fallback: bool = False


@dataclass(frozen=True, slots=True)
class CurvatureDiagnostics:
    """Quantities entering the sign conditions behind monotone convergence.

    ``y`` is the log-vega of the branch (g' below, -l' above), ``a`` and
    ``beta_v`` depend only on (x, v), and ``q`` is the second-derivative
    ratio of the branch objective.
    """

    y: float
    a: float
    beta_v: float
    q: float
    schwarz_bound: float
    scalar_inequality: float


@dataclass(slots=True)
class SolveTrace:
    """Iterates of one refinement run, seed first."""

    branch: Branch
    iterates: list[float] = field(default_factory=list)
    steps: list[StepDiagnostics] = field(default_factory=list)
    interrupted: bool = False

    @property
    def final(self) -> float:
        return self.iterates[-1]


# ============================================================================
# Derivative ratios
# ============================================================================


def lower_ratios(ev: TailObjectiveEval) -> Tuple[float, float]:
    """g' = (2/sqrt(2 pi))/(N+ - N-) and g''/g' = (h + t)(h - t)/v - g'.

    Raises:
        DegenerateDifference: If N+ - N- is not positive
    """
    diff = ev.spread
    if not (diff > 0.0 and math.isfinite(diff)):
        raise DegenerateDifference("erfcx difference unusable in log-vega")
    h, t = ev.coords.h, ev.coords.t
    g_prime = _TWO_OVER_SQRT_TWO_PI / diff
    d2_ratio = (h + t) * (h - t) / (2.0 * t) - g_prime
    return g_prime, d2_ratio


def upper_ratios(ev: TailObjectiveEval) -> Tuple[float, float]:
    """Upper-branch ratios with S = M+ + M-.

    l' = -2/(sqrt(2 pi) S) and l''/l' = -(h + t)(1/2 - x/v^2) + 2/(sqrt(2 pi) S).
    """
    h, t = ev.coords.h, ev.coords.t
    y = _TWO_OVER_SQRT_TWO_PI / ev.spread
    # x/v^2 == h/v
    d2_ratio = -(h + t) * (0.5 - h / (2.0 * t)) + y
    return -y, d2_ratio


def lower_third_ratio(ev: TailObjectiveEval) -> float:
    """g'''/g' for the lower objective.

    Equal to (-3h^2 - t^2 + (h^2 - t^2)^2)/v^2 - 3 g' (g''/g') - g'^2.
    """
    g_prime, d2_ratio = lower_ratios(ev)
    h, t = ev.coords.h, ev.coords.t
    hh, tt = h * h, t * t
    v = 2.0 * t
    base = (-3.0 * hh - tt + (hh - tt) * (hh - tt)) / (v * v)
    return base - 3.0 * g_prime * d2_ratio - g_prime * g_prime


def curvature_diagnostics(x: float, v: float, branch: Branch) -> CurvatureDiagnostics:
    """Evaluate a(v), beta(v), the log-vega and both sign expressions at (x, v).

    ``scalar_inequality`` is y^2 - 3ay + 2a^2 + beta. With q = a - y on the
    lower branch it is evaluated as q^2 + a q + beta.
    """
    k = -x
    kk = k * k
    a = kk / (v * v * v) - 0.25 * v
    beta_v = 3.0 * kk / (v * v * v * v) + 0.25
    if branch == "lower":
        y, q = lower_ratios(log_price_lower(x, v))
        scalar = q * q + a * q + beta_v
    else:
        l_prime, q = upper_ratios(log_gap_upper(x, v))
        y = -l_prime
        scalar = (y - a) * (y - 2.0 * a) + beta_v
    schwarz_bound = 0.5 * (y - a) * (y + a) - beta_v
    return CurvatureDiagnostics(y, a, beta_v, q, schwarz_bound, scalar)


# ============================================================================
# One-step maps
# ============================================================================


def _guarded(v: float, eta: float, candidate: float) -> Tuple[float, bool]:
    if math.isfinite(candidate) and candidate > 0.0:
        return candidate, False
    newton = v + eta
    if math.isfinite(newton) and newton > 0.0:
        return newton, True
    return v, True


def chebyshev_step(
    x: float, v: float, target_log_c: float
) -> Tuple[float, StepDiagnostics]:
    """One Euler-Chebyshev step on ln c(v) = target_log_c.

    Falls back to the Newton value v + eta when the cubic step is not finite
    and positive.
    """
    ev = log_price_lower(x, v)
    g_prime, d2_ratio = lower_ratios(ev)
    residual = ev.log_value - target_log_c
    eta = -residual / g_prime
    lam = residual * d2_ratio / g_prime
    v_next, fallback = _guarded(v, eta, v + eta * (1.0 + 0.5 * lam))
    return v_next, StepDiagnostics(eta, lam, "lower", v, v_next, fallback)


def halley_step(
    x: float, v: float, target_log_gap: float
) -> Tuple[float, StepDiagnostics]:
    """One Halley step on ln(1 - c(v)) = target_log_gap."""
    ev = log_gap_upper(x, v)
    l_prime, d2_ratio = upper_ratios(ev)
    if l_prime == 0.0:
        return v, StepDiagnostics(0.0, 0.0, "upper", v, v, True)
    residual = ev.log_value - target_log_gap
    eta = -residual / l_prime
    lam = residual * d2_ratio / l_prime
    v_next, fallback = _guarded(v, eta, v + eta / (1.0 - 0.5 * lam))
    return v_next, StepDiagnostics(eta, lam, "upper", v, v_next, fallback)


def refine3(x: float, c: float, v0: float) -> SolveTrace:
    """Apply exactly three refinement steps from the seed ``v0``.

    The lower branch is used iff c <= 1/2. If the lower objective degenerates
    the run stops and the last good iterate is final.

    Args:
        x: Log-moneyness, x <= 0
        c: Normalized OTM price in (0, 1)
        v0: Seed total volatility

    Returns:
        SolveTrace with the seed and every iterate
    """
    step: Callable[[float, float, float], Tuple[float, StepDiagnostics]]
    if c <= 0.5:
        branch: Branch = "lower"
        target = math.log(c)
        step = chebyshev_step
    else:
        branch = "upper"
        target = math.log(1.0 - c)
        step = halley_step

    trace = SolveTrace(branch=branch, iterates=[v0])
    v = v0
    for _ in range(REFINE_STEPS):
        try:
            v, diag = step(x, v, target)
        except DegenerateDifference:
            logger.debug(
                "Degenerate erfcx difference, keeping last iterate",
                extra={"component": "refine", "operation": "refine3", "x": x, "v": v},
            )
            trace.interrupted = True
            break
        if diag.fallback:
            logger.debug(
                "Cubic step rejected, used Newton fallback",
                extra={"component": "refine", "operation": branch, "x": x, "v": v},
            )
        trace.iterates.append(v)
        trace.steps.append(diag)
    return trace
