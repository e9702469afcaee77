#!/usr/bin/env python3
"""Tests for float helpers, error types, formatters and structured logging."""

import json
import logging
import math

import pytest

from tailvol.dispatch import SolveResult
from tailvol.utils.exceptions import (
    ArbitrageViolation,
    DomainError,
    InvalidInput,
    MissingReferenceTable,
    TailVolError,
)
from tailvol.utils.floats import (
    float_to_hex,
    next_down,
    next_up,
    parse_float_literal,
    ulp_distance,
    ulp_up,
)
from tailvol.utils.formatters import (
    format_dataset_listing,
    format_error_message,
    format_error_stats,
    format_solve_result,
)
from tailvol.utils.logger import (
    ROOT_LOGGER_NAME,
    get_logger,
    log_benchmark_run,
    setup_logging,
)


class TestFloats:
    def test_ulp_of_one(self):
        assert ulp_up(1.0) == 2.0**-52
        assert ulp_up(0.0) == 5e-324

    def test_neighbours(self):
        assert next_up(1.0) == 1.0 + 2.0**-52
        assert next_down(1.0) == 1.0 - 2.0**-53
        assert next_down(next_up(0.3)) == 0.3

    def test_ulp_distance(self):
        assert ulp_distance(next_up(next_up(2.0)), 2.0) == 2.0
        assert ulp_distance(0.5, 0.5) == 0.0

    @pytest.mark.parametrize(
        "text,value",
        [
            ("0.05", 0.05),
            (" 1e-300 ", 1e-300),
            ("0x1p-1", 0.5),
            ("-0x1.8p+1", -3.0),
            ("0X1.999999999999AP-4", 0.1),
        ],
    )
    def test_parse_literal(self, text, value):
        assert parse_float_literal(text) == value

    @pytest.mark.parametrize("text", ["", "abc", "0x", "1.0.0", "0xzz"])
    def test_parse_literal_rejects(self, text):
        with pytest.raises(InvalidInput) as exc_info:
            parse_float_literal(text, "price")
        assert exc_info.value.field == "price"

    def test_hex_round_trip(self):
        for value in (0.1, 5e-324, 1.7976931348623157e308, -2.5):
            assert float.fromhex(float_to_hex(value)) == value


class TestExceptions:
    def test_error_codes(self):
        assert InvalidInput("bad", "x", 1.0).error_code == "VALIDATION_ERROR"
        arbitrage = ArbitrageViolation("out", price=2.0, lower=0.0, upper=1.0)
        assert arbitrage.error_code == "ARBITRAGE_VIOLATION"
        assert arbitrage.details == {"price": 2.0, "lower": 0.0, "upper": 1.0}
        missing = MissingReferenceTable("gone", "Corners", "/tmp/corners.csv")
        assert missing.details["path"] == "/tmp/corners.csv"

    def test_domain_error_is_value_error(self):
        err = DomainError("p outside (0, 1)", 1.5)
        assert isinstance(err, ValueError)
        assert isinstance(err, TailVolError)
        assert err.details == {"argument": 1.5}

    def test_base_defaults(self):
        err = TailVolError("plain")
        assert err.error_code is None
        assert err.details == {}
        assert str(err) == "plain"


class TestFormatters:
    def test_error_message_skips_empty_details(self):
        text = format_error_message(
            "InvalidInput", "bad value", {"field": "x", "value": None}
        )
        assert text.startswith("❌ **InvalidInput**")
        assert "**field:** x" in text
        assert "value" not in text.split("Details")[1]

    def test_solve_result(self):
        result = SolveResult(
            0.2, 0.2, ("l3_seed", "lower_chebyshev"), (0.19, 0.2, 0.2, 0.2)
        )
        text = format_solve_result(result, 1.0)
        assert "l3_seed → lower_chebyshev" in text
        assert "step 3" in text
        assert float.hex(0.2) in text

    def test_error_stats(self):
        text = format_error_stats(
            {"dataset": "Corners", "variant": "polished", "count": 278}
        )
        assert "Corners" in text and "278" in text
        assert "ulps" not in text

    def test_dataset_listing(self):
        rows = [
            {"dataset": "HighVol", "path": "/d/highvol.csv", "present": True},
            {"dataset": "Stress", "path": "/d/stress.csv", "present": False},
        ]
        rows[0]["count"] = 149
        text = format_dataset_listing(rows)
        assert "HighVol: ✅ (149 cases)" in text
        assert "Stress: ❌ missing" in text


@pytest.fixture
def json_logging():
    yield setup_logging("INFO", "json", include_extra=True)
    root = logging.getLogger(ROOT_LOGGER_NAME)
    for handler in root.handlers[:]:
        root.removeHandler(handler)


class TestLogging:
    def test_json_record(self, capsys, json_logging):
        get_logger("refine").info(
            "step taken", extra={"component": "refine", "operation": "lower"}
        )
        record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert record["message"] == "step taken"
        assert record["levelname"] == "INFO"
        assert record["name"] == "tailvol.refine"
        assert record["component"] == "refine"
        assert len(record["run_id"]) == 8
        assert record["timestamp"].endswith("Z")

    def test_benchmark_record(self, capsys, json_logging):
        log_benchmark_run(
            get_logger("benchmarks"), "HighVol", "polished", "accuracy", 12.5, count=3
        )
        record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert record["dataset"] == "HighVol"
        assert record["variant"] == "polished"
        assert record["count"] == 3
        assert math.isclose(record["duration_ms"], 12.5)

    def test_level_filters(self, capsys):
        setup_logging("WARNING", "text")
        try:
            get_logger("seed").info("hidden")
            get_logger("seed").warning("shown")
            err = capsys.readouterr().err
        finally:
            root = logging.getLogger(ROOT_LOGGER_NAME)
            for handler in root.handlers[:]:
                root.removeHandler(handler)
        assert "hidden" not in err
        assert "shown" in err
