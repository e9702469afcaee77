#!/usr/bin/env python3
"""Command-line front end: inversion, pricing, benchmarks, reference tables,
figure data and oracle queries.

Exit status is 0 on success and 2 on any input, arbitrage or missing-table
error. Numeric flags accept decimal and C99 hexadecimal float literals.
"""

import argparse
import json
import math
import sys
import time
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

from mpmath import mp

from .benchmarks import (
    DATASET_NAMES,
    build_dataset,
    emit_figure_data,
    generate_reference_table,
    json_safe,
    run_accuracy,
    run_latency,
    table_path,
    write_rows_csv,
    write_summary_json,
)
from .config import DEFAULT_VARIANT, LOG_FORMAT, LOG_INCLUDE_EXTRA, LOG_LEVEL
from .dispatch import solve
from .normalize import normalize
from .oracle import PrecisionContext, hp_implied_vol, hp_price, to_double
from .pricing import log_price_lower, price_by_path
from .utils.exceptions import DegenerateDifference, InvalidInput, TailVolError
from .utils.floats import float_to_hex, parse_float_literal
from .utils.formatters import (
    format_dataset_listing,
    format_error_message,
    format_error_stats,
    format_price,
    format_solve_result,
)
from .utils.logger import get_logger, log_command_execution, setup_logging
from .utils.validators import (
    BenchRequest,
    DatasetsRequest,
    FigdataRequest,
    InvertRequest,
    OracleRequest,
    PriceRequest,
    validate_command_request,
)

logger = get_logger("cli")

EXIT_OK = 0
EXIT_INPUT_ERROR = 2


def _float_arg(text: str) -> float:
    try:
        return parse_float_literal(text)
    except InvalidInput as e:
        raise argparse.ArgumentTypeError(e.message)


def _dump(payload: Any) -> str:
    return json.dumps(json_safe(payload), indent=2, sort_keys=True)


# ============================================================================
# Command handlers
# ============================================================================


def cmd_invert(request: InvertRequest) -> str:
    nq = normalize(request.to_quote())
    result = solve(nq.x, nq.c, nq.expiry, request.polish)
    if not request.json_output:
        return format_solve_result(result, nq.expiry)
    return _dump(
        {
            "sigma": result.implied_vol,
            "sigma_hex": float_to_hex(result.implied_vol),
            "total_vol": result.total_vol,
            "total_vol_hex": float_to_hex(result.total_vol),
            "branch_path": list(result.branch_path),
            "trace": list(result.trace),
            "polished": result.polished,
            "x": nq.x,
            "c": nq.c,
            "expiry": nq.expiry,
        }
    )


def _log_price(x: float, v: float, path: str, price: float) -> Optional[float]:
    if path == "erfcxlog" and price <= 0.5:
        try:
            return log_price_lower(x, v, literal=True).log_value
        except DegenerateDifference:
            pass
    return math.log(price) if price > 0.0 else -math.inf


def cmd_price(request: PriceRequest) -> str:
    price = price_by_path(request.x, request.v, request.path)
    if not request.json_output:
        output = format_price(request.x, request.v, request.path, price)
        log_c = _log_price(request.x, request.v, request.path, price)
        return output + f"   ln c: {log_c!r}\n"
    return _dump(
        {
            "x": request.x,
            "v": request.v,
            "path": request.path,
            "c": price,
            "c_hex": float_to_hex(price),
            "log_c": _log_price(request.x, request.v, request.path, price),
        }
    )


def cmd_bench(request: BenchRequest) -> str:
    cases = build_dataset(request.dataset)
    run_acc = request.accuracy or not request.latency
    keep_rows = request.out is not None and request.out.suffix == ".csv"

    summary: Dict[str, Any] = {
        "dataset": request.dataset,
        "variant": request.variant,
        "count": len(cases),
    }
    per_case: List[Dict[str, Any]] = []
    if run_acc:
        stats = run_accuracy(cases, request.variant, request.workers, keep_rows)
        summary.update(stats.to_dict())
        per_case = stats.per_case or []
    if request.latency:
        summary["ns_per_call"] = run_latency(
            cases, request.variant, request.sweeps, request.runs
        )

    if request.out is not None:
        if keep_rows:
            write_rows_csv(request.out, per_case)
        else:
            write_summary_json(request.out, [summary])

    return _dump(summary) if request.json_output else format_error_stats(summary)


def cmd_datasets(request: DatasetsRequest) -> str:
    rows = []
    for name in request.names or list(DATASET_NAMES):
        path = table_path(name)
        if request.regenerate:
            count: Optional[int] = len(generate_reference_table(name, request.workers))
        elif path.is_file():
            count = len(build_dataset(name))
        else:
            count = None
        rows.append(
            {
                "dataset": name,
                "path": str(path),
                "present": path.is_file(),
                "count": count,
            }
        )
    return _dump(rows) if request.json_output else format_dataset_listing(rows)


def cmd_figdata(request: FigdataRequest) -> str:
    rows = emit_figure_data(request.which)
    out = request.out or Path(f"{request.which}.csv")
    if out.suffix == ".json":
        write_summary_json(out, rows)
    else:
        write_rows_csv(out, rows)
    return f"📈 Wrote {len(rows)} rows of {request.which} to {out}\n"


def cmd_oracle(request: OracleRequest) -> str:
    ctx = PrecisionContext(digits=request.digits)
    if request.mode == "price":
        if request.v is None:
            raise InvalidInput("oracle price needs --v", "v")
        value = hp_price(request.x, request.v, ctx)
    else:
        if request.c is None:
            raise InvalidInput("oracle ivol needs --c", "c")
        value = hp_implied_vol(request.x, request.c, ctx)

    with mp.workdps(request.digits):
        text = mp.nstr(value, request.digits)
    double = to_double(value)
    if request.json_output:
        return _dump(
            {
                "mode": request.mode,
                "digits": request.digits,
                "value": text,
                "double": double,
                "double_hex": float_to_hex(double),
            }
        )
    return f"🎯 {request.mode} @ {request.digits} digits\n   {text}\n   {double!r}\n"


COMMAND_HANDLERS: Dict[str, Callable[[Any], str]] = {
    "invert": cmd_invert,
    "price": cmd_price,
    "bench": cmd_bench,
    "datasets": cmd_datasets,
    "figdata": cmd_figdata,
    "oracle": cmd_oracle,
}


# ============================================================================
# Parser
# ============================================================================


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tailvol", description="Black implied volatility from tail-log objectives"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    invert = sub.add_parser("invert", help="Implied volatility of a call or put quote")
    invert.add_argument("kind", choices=["call", "put"])
    invert.add_argument("--forward", type=_float_arg)
    invert.add_argument("--spot", type=_float_arg)
    invert.add_argument("--rate", type=_float_arg, default=0.0)
    invert.add_argument("--strike", type=_float_arg, required=True)
    invert.add_argument("--expiry", type=_float_arg, required=True)
    invert.add_argument("--price", type=_float_arg, required=True)
    invert.add_argument("--polish", action="store_true")
    invert.add_argument("--json", dest="json_output", action="store_true")

    price = sub.add_parser("price", help="Normalized Black price c(x, v)")
    price.add_argument("--x", type=_float_arg, required=True)
    price.add_argument("--v", type=_float_arg, required=True)
    price.add_argument("--path", choices=["cdf", "erfcxlog", "expanded"])
    price.add_argument("--json", dest="json_output", action="store_true")

    bench = sub.add_parser("bench", help="Accuracy and latency on a dataset")
    bench.add_argument("--dataset", choices=list(DATASET_NAMES), required=True)
    bench.add_argument("--variant", choices=["unpolished", "polished"])
    bench.add_argument("--accuracy", action="store_true")
    bench.add_argument("--latency", action="store_true")
    bench.add_argument("--sweeps", type=int)
    bench.add_argument("--runs", type=int)
    bench.add_argument("--workers", type=int)
    bench.add_argument("--out", type=Path)
    bench.add_argument("--json", dest="json_output", action="store_true")

    datasets = sub.add_parser("datasets", help="List or regenerate reference tables")
    datasets.add_argument("names", nargs="*", metavar="NAME")
    datasets.add_argument("--regenerate", action="store_true")
    datasets.add_argument("--workers", type=int)
    datasets.add_argument("--json", dest="json_output", action="store_true")

    figdata = sub.add_parser("figdata", help="Write diagnostic figure data")
    figdata.add_argument(
        "which",
        choices=[
            "fig1_sweeps",
            "fig2_steps",
            "fig3_branchmap",
            "fig4_convergence",
            "fig5_roundtrip",
            "pricing_regimes",
            "polish_bands",
        ],
    )
    figdata.add_argument("--out", type=Path)

    oracle = sub.add_parser("oracle", help="Multiprecision price or implied volatility")
    oracle.add_argument("mode", choices=["price", "ivol"])
    oracle.add_argument("--x", type=_float_arg, required=True)
    oracle.add_argument("--v", type=_float_arg)
    oracle.add_argument("--c", type=_float_arg)
    oracle.add_argument("--digits", type=int, default=50)
    oracle.add_argument("--json", dest="json_output", action="store_true")

    return parser


def _arguments(args: argparse.Namespace) -> Dict[str, Any]:
    arguments = {
        k: v for k, v in vars(args).items() if k != "command" and v is not None
    }
    if args.command == "bench" and "variant" not in arguments:
        arguments["variant"] = DEFAULT_VARIANT
    return arguments


def run_command(command: str, arguments: Dict[str, Any]) -> int:
    """Validate and execute one subcommand, printing its output.

    Args:
        command: Subcommand name
        arguments: Flag values

    Returns:
        Process exit status
    """
    start_time = time.time()
    try:
        request = validate_command_request(command, arguments)
        output = COMMAND_HANDLERS[command](request)
        sys.stdout.write(output if output.endswith("\n") else output + "\n")

        duration_ms = (time.time() - start_time) * 1000
        log_command_execution(logger, command, duration_ms, success=True)
        return EXIT_OK

    except TailVolError as e:
        duration_ms = (time.time() - start_time) * 1000
        log_command_execution(
            logger,
            command,
            duration_ms,
            success=False,
            error_code=e.error_code,
            error_message=e.message,
        )
        sys.stderr.write(
            format_error_message(type(e).__name__, e.message, e.details or None)
        )
        return EXIT_INPUT_ERROR


def main(argv: Optional[List[str]] = None) -> int:
    """Console entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(LOG_LEVEL, LOG_FORMAT, LOG_INCLUDE_EXTRA)
    return run_command(args.command, _arguments(args))


if __name__ == "__main__":
    sys.exit(main())
