#!/usr/bin/env python3
"""Double-precision helpers: ulp spacing and lossless float literals."""

import math
import re

from .exceptions import InvalidInput

_HEX_FLOAT = re.compile(r"^[+-]?0[xX]")


def ulp_up(value: float) -> float:
    """Spacing from ``value`` to the next double toward +inf."""
    return math.nextafter(value, math.inf) - value


def ulp_distance(a: float, b: float) -> float:
    """|a - b| measured in ulps of ``b`` (the reference)."""
    return abs(a - b) / ulp_up(b)


def next_up(value: float) -> float:
    return math.nextafter(value, math.inf)


def next_down(value: float) -> float:
    return math.nextafter(value, -math.inf)


def parse_float_literal(text: str, field: str = "value") -> float:
    """Parse a decimal or C99 hexadecimal float literal.

    Args:
        text: Literal such as ``"0.05"`` or ``"0x1.999999999999ap-5"``
        field: Name reported in validation errors

    Returns:
        The parsed double

    Raises:
        InvalidInput: If the literal is malformed
    """
    stripped = text.strip()
    try:
        if _HEX_FLOAT.match(stripped):
            return float.fromhex(stripped)
        return float(stripped)
    except ValueError:
        raise InvalidInput(f"Not a float literal: {text!r}", field, text)


def float_to_hex(value: float) -> str:
    return float.hex(value)
