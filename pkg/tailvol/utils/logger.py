#!/usr/bin/env python3
"""Structured logging setup for tailvol."""

import logging
import sys
import time
import uuid
from typing import Optional

from pythonjsonlogger import jsonlogger

ROOT_LOGGER_NAME = "tailvol"

# One id per process so that records from a bench run can be grouped.
_RUN_ID = str(uuid.uuid4())[:8]


class RunContextFilter(logging.Filter):
    """Add run context to log records."""

    def filter(self, record: logging.LogRecord) -> bool:
        if not hasattr(record, "run_id"):
            record.run_id = _RUN_ID

        record.timestamp = time.strftime(
            "%Y-%m-%dT%H:%M:%SZ", time.gmtime(record.created)
        )

        return True


def setup_logging(
    level: str = "INFO", format_type: str = "json", include_extra: bool = True
) -> logging.Logger:
    """Set up structured logging for the application.

    Args:
        level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        format_type: Log format type ("json" or "text")
        include_extra: Whether to include the run id in JSON logs

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(ROOT_LOGGER_NAME)
    logger.setLevel(getattr(logging, level.upper()))

    for handler in logger.handlers[:]:
        logger.removeHandler(handler)

    handler = logging.StreamHandler(sys.stderr)
    handler.setLevel(getattr(logging, level.upper()))

    if format_type == "json":
        fmt = "%(timestamp)s %(levelname)s %(name)s %(message)s"
        if include_extra:
            fmt += " %(run_id)s"
        formatter = jsonlogger.JsonFormatter(fmt=fmt)
    else:
        formatter = logging.Formatter(
            "%(asctime)s - %(name)s - %(levelname)s - [%(run_id)s] - %(message)s"
        )

    handler.setFormatter(formatter)
    handler.addFilter(RunContextFilter())

    logger.addHandler(handler)
    logger.propagate = False

    return logger


def get_logger(name: Optional[str] = None) -> logging.Logger:
    """Get a logger instance with the given name.

    Args:
        name: Logger name (defaults to "tailvol")

    Returns:
        Logger instance
    """
    if name:
        return logging.getLogger(f"{ROOT_LOGGER_NAME}.{name}")
    return logging.getLogger(ROOT_LOGGER_NAME)


def log_command_execution(
    logger: logging.Logger,
    command: str,
    duration_ms: float,
    success: bool,
    error_code: Optional[str] = None,
    **kwargs,
) -> None:
    """Log a CLI subcommand execution with structured data.

    Args:
        logger: Logger instance
        command: Subcommand name
        duration_ms: Duration in milliseconds
        success: Whether the command succeeded
        error_code: Error code (if applicable)
        **kwargs: Additional fields to include in log
    """
    log_data = {
        "component": "cli",
        "operation": f"cmd_{command}",
        "duration_ms": duration_ms,
        "success": success,
    }

    if error_code is not None:
        log_data["error_code"] = error_code

    log_data.update(kwargs)

    if success:
        logger.info(f"Command completed: {command}", extra=log_data)
    else:
        logger.error(f"Command failed: {command}", extra=log_data)


def log_benchmark_run(
    logger: logging.Logger,
    dataset: str,
    variant: Optional[str],
    operation: str,
    duration_ms: float,
    **kwargs,
) -> None:
    """Log a benchmark or reference-generation run.

    Args:
        logger: Logger instance
        dataset: Dataset name
        variant: Solver variant, if the run exercises the solver
        operation: "accuracy", "latency" or "reference"
        duration_ms: Wall time in milliseconds
        **kwargs: Additional fields to include in log
    """
    log_data = {
        "component": "benchmarks",
        "operation": operation,
        "dataset": dataset,
        "duration_ms": duration_ms,
    }

    if variant is not None:
        log_data["variant"] = variant

    log_data.update(kwargs)

    logger.info(f"Benchmark {operation} finished: {dataset}", extra=log_data)
