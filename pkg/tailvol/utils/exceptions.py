#!/usr/bin/env python3
"""Custom exception classes for the tailvol implied-volatility library."""

from pathlib import Path
from typing import Any, Dict, Optional, Union


class TailVolError(Exception):
    """Base exception for all tailvol errors."""

    def __init__(
        self,
        message: str,
        error_code: Optional[str] = None,
        details: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message)
        self.message = message
        self.error_code = error_code
        self.details = details or {}


class InvalidInput(TailVolError):
    """Raised when a quote or command argument fails validation."""

    def __init__(
        self, message: str, field: Optional[str] = None, value: Optional[Any] = None
    ):
        super().__init__(message, "VALIDATION_ERROR", {"field": field, "value": value})
        self.field = field
        self.value = value


class ArbitrageViolation(TailVolError):
    """Raised when an OTM price falls outside the open no-arbitrage band."""

    def __init__(
        self,
        message: str,
        price: Optional[float] = None,
        lower: Optional[float] = None,
        upper: Optional[float] = None,
    ):
        super().__init__(
            message,
            "ARBITRAGE_VIOLATION",
            {"price": price, "lower": lower, "upper": upper},
        )
        self.price = price
        self.lower = lower
        self.upper = upper


class DomainError(TailVolError, ValueError):
    """Raised when a special function is called outside its domain."""

    def __init__(self, message: str, argument: Optional[float] = None):
        super().__init__(message, "DOMAIN_ERROR", {"argument": argument})
        self.argument = argument


class DegenerateDifference(TailVolError):
    """Raised when the erfcx difference N+ - N- cancels completely."""

    def __init__(
        self, message: str, x: Optional[float] = None, v: Optional[float] = None
    ):
        super().__init__(message, "DEGENERATE_DIFFERENCE", {"x": x, "v": v})
        self.x = x
        self.v = v


class NoConvergence(TailVolError):
    """Raised when a reference root finder exhausts its iteration budget."""

    def __init__(
        self,
        message: str,
        iterations: Optional[int] = None,
        residual: Optional[Any] = None,
    ):
        super().__init__(
            message,
            "NO_CONVERGENCE",
            {"iterations": iterations, "residual": str(residual)},
        )
        self.iterations = iterations
        self.residual = residual


class PrecisionLoss(TailVolError):
    """Raised when a multiprecision evaluation cancels too many digits."""

    def __init__(
        self,
        message: str,
        digits: Optional[int] = None,
        lost_digits: Optional[int] = None,
    ):
        super().__init__(
            message, "PRECISION_LOSS", {"digits": digits, "lost_digits": lost_digits}
        )
        self.digits = digits
        self.lost_digits = lost_digits


class MissingReferenceTable(TailVolError):
    """Raised when a persisted oracle table is absent and not regenerated."""

    def __init__(
        self,
        message: str,
        dataset: Optional[str] = None,
        path: Optional[Union[str, Path]] = None,
    ):
        super().__init__(
            message,
            "MISSING_REFERENCE_TABLE",
            {"dataset": dataset, "path": str(path) if path is not None else None},
        )
        self.dataset = dataset
        self.path = path


class ConfigurationError(TailVolError):
    """Raised when there's a configuration error."""

    def __init__(self, message: str, config_key: Optional[str] = None):
        super().__init__(message, "CONFIGURATION_ERROR", {"config_key": config_key})
        self.config_key = config_key
