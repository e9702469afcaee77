#!/usr/bin/env python3
"""Human-readable formatters for CLI output."""

from typing import Any, Dict, Optional, Sequence

from ..dispatch import SolveResult


def _fmt(value: float) -> str:
    return f"{value!r} ({float.hex(value)})"


def format_solve_result(result: SolveResult, expiry: float) -> str:
    """Format a solver result with its branch path and iterates.

    Args:
        result: Output of dispatch.solve
        expiry: Time to expiry used for the annualized volatility

    Returns:
        Multi-line text block
    """
    output = "✅ **Implied volatility**\n\n"
    output += f"   σ: {_fmt(result.implied_vol)}\n"
    output += f"   v = σ√T: {_fmt(result.total_vol)}  (T = {expiry!r})\n"
    output += f"   🔀 Branch: {' → '.join(result.branch_path)}\n"
    output += f"   ✨ Polished: {'Yes' if result.polished else 'No'}\n"

    if result.trace:
        output += "   🔁 Iterates:\n"
        for i, v in enumerate(result.trace):
            label = "seed" if i == 0 else f"step {i}"
            output += f"      {label}: {v!r}\n"

    return output


def format_price(x: float, v: float, path: str, price: float) -> str:
    output = f"💲 Normalized price ({path})\n"
    output += f"   x: {x!r}\n"
    output += f"   v: {v!r}\n"
    output += f"   c: {_fmt(price)}\n"
    return output


def format_error_stats(stats: Dict[str, Any]) -> str:
    """Format one accuracy or latency summary row."""
    output = f"📊 **{stats.get('dataset', '?')}** [{stats.get('variant', '?')}]\n"
    if "count" in stats:
        output += f"   Cases: {stats['count']:,}\n"
    if "max_ulp" in stats:
        output += f"   Max error: {stats['max_ulp']:.3g} ulps\n"
        output += f"   Max |Δv|: {stats['max_abs_vol']:.3e}\n"
    if "ns_per_call" in stats:
        output += f"   ⏱️  {stats['ns_per_call']:.1f} ns/call\n"
    return output


def format_dataset_listing(rows: Sequence[Dict[str, Any]]) -> str:
    output = "🗂️  **Reference tables**\n\n"
    for row in rows:
        status = "✅" if row.get("present") else "❌ missing"
        count = row.get("count")
        suffix = f" ({count:,} cases)" if count is not None else ""
        output += f"• {row['dataset']}: {status}{suffix}\n"
        output += f"   {row['path']}\n"
    return output


def format_error_message(
    error_type: str, message: str, details: Optional[Dict[str, Any]] = None
) -> str:
    """Format error message.

    Args:
        error_type: Type of error
        message: Error message
        details: Optional error details

    Returns:
        Formatted error message
    """
    output = f"❌ **{error_type}**\n\n{message}\n"

    if details:
        output += "\n**Details:**\n"
        for key, value in details.items():
            if value is None:
                continue
            output += f"• **{key}:** {value}\n"

    return output
