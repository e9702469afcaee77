#!/usr/bin/env python3
"""tailvol - Black implied volatility from tail-log objectives.

A seed from the Choi L3 lower bound is refined by three third-order steps on
ln c (lower half) or ln(1 - c) (upper half), with erfcx keeping both tails
free of cancellation. A multiprecision oracle and benchmark harness ship
alongside the solver.
"""

__version__ = "1.0.0"
__author__ = "tailvol developers"

from .dispatch import SolveResult, implied_total_vol, implied_vol_from_quote, solve
from .normalize import NormalizedQuote, normalize
from .utils.validators import RawQuote

__all__ = [
    "NormalizedQuote",
    "RawQuote",
    "SolveResult",
    "implied_total_vol",
    "implied_vol_from_quote",
    "normalize",
    "solve",
]
