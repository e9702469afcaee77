"""Utility modules for tailvol."""

from .exceptions import (
    ArbitrageViolation,
    ConfigurationError,
    DegenerateDifference,
    DomainError,
    InvalidInput,
    MissingReferenceTable,
    NoConvergence,
    PrecisionLoss,
    TailVolError,
)
from .floats import float_to_hex, parse_float_literal, ulp_distance, ulp_up
from .logger import get_logger, log_benchmark_run, log_command_execution, setup_logging
from .validators import RawQuote, validate_command_request, validate_quote

__all__ = [
    "ArbitrageViolation",
    "ConfigurationError",
    "DegenerateDifference",
    "DomainError",
    "InvalidInput",
    "MissingReferenceTable",
    "NoConvergence",
    "PrecisionLoss",
    "TailVolError",
    "float_to_hex",
    "parse_float_literal",
    "ulp_distance",
    "ulp_up",
    "get_logger",
    "log_benchmark_run",
    "log_command_execution",
    "setup_logging",
    "RawQuote",
    "validate_command_request",
    "validate_quote",
]
