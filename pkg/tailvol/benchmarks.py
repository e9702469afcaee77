#!/usr/bin/env python3
"""Benchmark datasets, accuracy and latency protocols, and figure data.

Reference prices come from the multiprecision oracle, rounded to double and
persisted once as lossless hex CSV tables under the reference directory.
Every other run reads those tables; nothing is regenerated implicitly.
"""

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from cachetools import LRUCache, cached
from mpmath import mp
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from .config import (
    ACCURACY_WORKERS,
    LATENCY_RUNS,
    LATENCY_SWEEPS,
    LATENCY_WARMUP,
    ORACLE_DIGITS,
    REFERENCE_CACHE_SIZE,
    REFERENCE_DIR,
)
from .dispatch import solve
from .normalize import C_UPPER_LIMIT
from .oracle import hp_implied_vol, hp_price, to_double, ulp_error
from .pricing import C_J, price_by_path
from .refine import refine3
from .seed import choi_l3
from .specfun import norm_pdf
from .utils.exceptions import InvalidInput, MissingReferenceTable
from .utils.floats import float_to_hex, next_up, ulp_up
from .utils.logger import get_logger, log_benchmark_run
from .utils.validators import DatasetName, FigureName, SolverVariant

logger = get_logger("benchmarks")

DATASET_NAMES: Tuple[DatasetName, ...] = (
    "CLY3D",
    "CLY20",
    "CLY80",
    "Jaeckel",
    "Market",
    "Corners",
    "Stress",
    "HighVol",
)

TABLE_COLUMNS = (
    "dataset",
    "case_id",
    "c_hex",
    "ex_hex",
    "T_hex",
    "sigma_hex",
    "v_ref_hex",
)

LOG_C_FLOOR = -708.0
LOG_C_CEILING = -1e-15
CLY3D_MIN_PRICE = 1e-20
HIGHVOL_MAX_LOG_C = -0.05

SWEEP_LENGTH = 512
FIGURE_ERROR_FLOOR = 1e-18

# (F*/K*, v) starting points of the one-ulp pricing sweeps
PRICING_SCENARIOS: Dict[str, Tuple[float, float]] = {
    "two_week_otm": (0.925, 2.99e-2),
    "monotonicity": (0.955, 5.00e-2),
    "one_day_near_atm": (0.995, 6.30e-3),
}
STEP_SCENARIO = "monotonicity"

PRICING_PATHS = ("cdf", "erfcxlog", "expanded")

_REFERENCE_CHUNKSIZE = 64
_ACCURACY_CHUNKSIZE = 256


# ============================================================================
# Case types
# ============================================================================


@dataclass(frozen=True, slots=True)
class RawCase:
    """One generated (S, K, T, sigma, r) point before normalization."""

    spot: float
    strike: float
    expiry: float
    sigma: float
    rate: float


class BenchCase(BaseModel):
    """A normalized benchmark quote with its generating volatility."""

    model_config = ConfigDict(frozen=True)

    dataset: DatasetName
    case_id: int
    c: float
    ex: float
    x: float
    expiry: float
    sigma_ref: float
    v_ref: float

    @field_validator("c")
    @classmethod
    def validate_price(cls, v):
        if not 0.0 < v < 1.0:
            raise ValueError("normalized price must lie in (0, 1)")
        log_c = math.log(v)
        if not LOG_C_FLOOR <= log_c <= LOG_C_CEILING:
            raise ValueError(
                f"ln c = {log_c!r} outside [{LOG_C_FLOOR}, {LOG_C_CEILING}]"
            )
        return v

    @model_validator(mode="after")
    def validate_moneyness(self):
        if not (0.0 < self.ex <= 1.0 and self.expiry > 0.0 and self.v_ref > 0.0):
            raise ValueError("ex must lie in (0, 1], expiry and v_ref must be positive")
        return self


@dataclass(slots=True)
class ErrorStats:
    """Accuracy of one solver variant over one dataset."""

    dataset: str
    variant: SolverVariant
    max_ulp: float = 0.0
    max_abs_vol: float = 0.0
    count: int = 0
    worst_case_id: Optional[int] = None
    per_case: Optional[List[Dict[str, Any]]] = field(default=None)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "dataset": self.dataset,
            "variant": self.variant,
            "max_ulp": self.max_ulp,
            "max_abs_vol": self.max_abs_vol,
            "count": self.count,
            "worst_case_id": self.worst_case_id,
        }


# ============================================================================
# Grids
# ============================================================================


@dataclass(frozen=True, slots=True)
class CornerSubgrid:
    label: str
    strikes: Tuple[float, ...]
    expiries: Tuple[float, ...]
    sigmas: Tuple[float, ...]

    @property
    def size(self) -> int:
        return len(self.strikes) * len(self.expiries) * len(self.sigmas)


def _linspace(start: float, stop: float, num: int) -> Tuple[float, ...]:
    return tuple(np.linspace(start, stop, num).tolist())


def _scaled_linspace(scale: float, start: float, stop: float, num: int):
    return tuple((scale * np.linspace(start, stop, num)).tolist())


# S = 100, r = 0 throughout. 300 raw points; the price filters keep 278,
# all removals coming from the near-ATM small-price block.
CORNERS_SUBGRIDS: Tuple[CornerSubgrid, ...] = (
    CornerSubgrid(
        "low_vol_short_itm",
        (95.0, 97.0, 98.0, 99.0, 99.5),
        (0.005, 0.01, 0.02, 0.05),
        (0.05, 0.10, 0.20),
    ),
    CornerSubgrid(
        "deep_otm",
        (200.0, 300.0, 500.0, 1000.0, 2000.0),
        (1.0, 2.0, 5.0, 10.0),
        (0.5, 0.8, 1.0, 1.5, 2.0),
    ),
    CornerSubgrid(
        "near_otm_short",
        _linspace(101.0, 150.0, 10),
        (0.01, 0.05, 0.1),
        (0.2, 0.4),
    ),
    CornerSubgrid(
        "high_vol",
        (100.0, 150.0, 200.0, 500.0),
        (1.0, 5.0),
        (1.5, 2.5),
    ),
    CornerSubgrid(
        "saturated_upper",
        (99.99, 100.01, 100.1, 101.0),
        (10.0,),
        (3.0,),
    ),
    CornerSubgrid(
        "near_atm_small_price",
        (100.5, 101.0, 102.0, 105.0, 110.0),
        (0.001, 0.005, 0.01),
        (0.005, 0.01, 0.02, 0.05),
    ),
)


def _grid(
    spot: float,
    rate: float,
    strikes: Iterable[float],
    expiries: Iterable[float],
    sigmas: Iterable[float],
) -> List[RawCase]:
    return [
        RawCase(spot, k, t, s, rate)
        for k, t, s in product(tuple(strikes), tuple(expiries), tuple(sigmas))
    ]


def _stress_grid() -> List[RawCase]:
    strikes = (101, 102, 103, 110, 150, 200, 500, 1000, 2000, 5000, 10000)
    strikes += (10, 20, 50, 80, 90, 95, 98, 99)
    return _grid(
        100.0,
        0.03,
        (float(k) for k in strikes),
        (0.001, 0.005, 0.01, 0.05, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0),
        (0.01, 0.02, 0.05, 0.10, 0.20, 0.30, 0.50, 0.80, 0.99),
    )


def _corners_grid() -> List[RawCase]:
    cases: List[RawCase] = []
    for sub in CORNERS_SUBGRIDS:
        cases.extend(_grid(100.0, 0.0, sub.strikes, sub.expiries, sub.sigmas))
    return cases


RAW_GRIDS: Dict[str, Callable[[], List[RawCase]]] = {
    "CLY3D": lambda: _grid(
        100.0,
        0.03,
        _linspace(105.0, 800.0, 40),
        _linspace(0.01, 2.0, 40),
        _linspace(0.01, 0.99, 40),
    ),
    "CLY20": lambda: _grid(
        100.0, 0.03, _linspace(105.0, 180.0, 40), _linspace(0.1, 2.0, 40), (0.20,)
    ),
    "CLY80": lambda: _grid(
        100.0, 0.03, _linspace(105.0, 800.0, 40), _linspace(0.1, 2.0, 40), (0.80,)
    ),
    "Jaeckel": lambda: _grid(
        100.0,
        0.0,
        _scaled_linspace(100.0, 0.5, 8.0, 30),
        (0.01, 0.1, 0.25, 0.5, 1.0, 2.0),
        _linspace(0.02, 4.0, 30),
    ),
    "Market": lambda: _grid(
        100.0,
        0.03,
        _scaled_linspace(100.0, 0.7, 1.5, 30),
        (1 / 252, 5 / 252, 21 / 252, 63 / 252, 0.5, 1.0, 2.0, 5.0),
        _linspace(0.05, 1.5, 30),
    ),
    "Corners": _corners_grid,
    "Stress": _stress_grid,
    "HighVol": lambda: _grid(
        100.0,
        0.0,
        (1.0, 2.0, 3.0, 4.0),
        (1.0, 2.0, 3.0, 5.0, 7.0, 10.0),
        (0.5, 0.8, 1.0, 1.2, 1.5, 2.0, 2.5),
    ),
}


def raw_grid(name: str) -> List[RawCase]:
    """Unfiltered generating points of a dataset, in K, T, sigma order."""
    if name not in RAW_GRIDS:
        raise InvalidInput(f"Unknown dataset: {name}", "dataset", name)
    return RAW_GRIDS[name]()


# ============================================================================
# Reference tables
# ============================================================================


def _normalized_point(raw: RawCase) -> Tuple[float, float, float, float]:
    forward = raw.spot * math.exp(raw.rate * raw.expiry)
    f_star, k_star = min(forward, raw.strike), max(forward, raw.strike)
    ex = f_star / k_star
    return forward, f_star, ex, raw.sigma * math.sqrt(raw.expiry)


def _reference_case(job: Tuple[str, int, RawCase]) -> Optional[Dict[str, Any]]:
    """Oracle price for one raw point, or None if a filter rejects it."""
    name, case_id, raw = job
    forward, f_star, ex, v_ref = _normalized_point(raw)
    x = math.log(ex)

    c_mp = hp_price(x, v_ref)
    with mp.workdps(ORACLE_DIGITS):
        log_c = float(mp.log(c_mp))
    if not (math.isfinite(log_c) and LOG_C_FLOOR <= log_c <= LOG_C_CEILING):
        return None
    if name == "HighVol" and log_c > HIGHVOL_MAX_LOG_C:
        return None

    c = to_double(c_mp)
    if not 0.0 < c < 1.0:
        return None
    if name == "CLY3D":
        undiscounted_call = f_star * c + max(forward - raw.strike, 0.0)
        if not undiscounted_call > CLY3D_MIN_PRICE:
            return None

    return {
        "dataset": name,
        "case_id": case_id,
        "c": c,
        "ex": ex,
        "x": x,
        "expiry": raw.expiry,
        "sigma_ref": raw.sigma,
        "v_ref": v_ref,
    }


def table_path(name: str, reference_dir: Optional[Path] = None) -> Path:
    return Path(reference_dir or REFERENCE_DIR) / f"{name.lower()}.csv"


def generate_reference_table(
    name: str, workers: Optional[int] = None, reference_dir: Optional[Path] = None
) -> List[BenchCase]:
    """Evaluate oracle prices for a dataset grid and persist the retained cases.

    Args:
        name: Dataset name
        workers: Worker processes; 1 evaluates in-process
        reference_dir: Target directory, the configured one by default

    Returns:
        The retained cases in grid order
    """
    start_time = time.time()
    jobs = [(name, i, raw) for i, raw in enumerate(raw_grid(name))]
    workers = workers or ACCURACY_WORKERS

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_reference_case, jobs, chunksize=_REFERENCE_CHUNKSIZE))
    else:
        rows = [_reference_case(job) for job in jobs]

    cases = [BenchCase(**row) for row in rows if row is not None]
    path = table_path(name, reference_dir)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TABLE_COLUMNS)
        for case in cases:
            writer.writerow(
                [
                    case.dataset,
                    case.case_id,
                    float_to_hex(case.c),
                    float_to_hex(case.ex),
                    float_to_hex(case.expiry),
                    float_to_hex(case.sigma_ref),
                    float_to_hex(case.v_ref),
                ]
            )

    duration_ms = (time.time() - start_time) * 1000
    log_benchmark_run(
        logger,
        name,
        None,
        "reference",
        duration_ms,
        raw_count=len(jobs),
        retained=len(cases),
        workers=workers,
        path=str(path),
    )
    return cases


@cached(cache=LRUCache(maxsize=REFERENCE_CACHE_SIZE))
def _load_table(path: str, mtime_ns: int) -> Tuple[BenchCase, ...]:
    cases = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            ex = float.fromhex(row["ex_hex"])
            cases.append(
                BenchCase(
                    dataset=row["dataset"],
                    case_id=int(row["case_id"]),
                    c=float.fromhex(row["c_hex"]),
                    ex=ex,
                    x=math.log(ex),
                    expiry=float.fromhex(row["T_hex"]),
                    sigma_ref=float.fromhex(row["sigma_hex"]),
                    v_ref=float.fromhex(row["v_ref_hex"]),
                )
            )
    return tuple(cases)


def build_dataset(
    name: str,
    regenerate: bool = False,
    reference_dir: Optional[Path] = None,
    workers: Optional[int] = None,
) -> List[BenchCase]:
    """Load a dataset from its persisted reference table.

    Args:
        name: One of DATASET_NAMES
        regenerate: Recompute the table with the oracle first
        reference_dir: Directory holding the tables
        workers: Worker processes for regeneration

    Returns:
        The filtered cases of the dataset

    Raises:
        InvalidInput: If the name is unknown
        MissingReferenceTable: If the table is absent and regeneration was not requested
    """
    if name not in RAW_GRIDS:
        raise InvalidInput(f"Unknown dataset: {name}", "dataset", name)
    if regenerate:
        return generate_reference_table(name, workers, reference_dir)

    path = table_path(name, reference_dir)
    if not path.is_file():
        raise MissingReferenceTable(
            f"No reference table for {name}; "
            f"run `tailvol datasets {name} --regenerate`",
            name,
            str(path),
        )
    return list(_load_table(str(path), path.stat().st_mtime_ns))


# ============================================================================
# Accuracy and latency
# ============================================================================


def _solve_case(job: Tuple[float, float, float, bool]) -> float:
    x, c, expiry, polish = job
    return solve(x, c, expiry, polish).total_vol


def run_accuracy(
    cases: Sequence[BenchCase],
    variant: SolverVariant = "unpolished",
    workers: Optional[int] = None,
    keep_rows: bool = False,
) -> ErrorStats:
    """Per-case ulp error of the solver against the generating total volatility.

    Args:
        cases: Dataset cases, all from one dataset
        variant: "unpolished" or "polished"
        workers: Worker processes; results are identical for any count
        keep_rows: Attach one detail row per case

    Returns:
        ErrorStats with the maxima over the dataset
    """
    start_time = time.time()
    polish = variant == "polished"
    name = cases[0].dataset if cases else ""
    jobs = [(case.x, case.c, case.expiry, polish) for case in cases]
    workers = workers or ACCURACY_WORKERS

    if workers > 1 and len(jobs) > _ACCURACY_CHUNKSIZE:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            solved = list(pool.map(_solve_case, jobs, chunksize=_ACCURACY_CHUNKSIZE))
    else:
        solved = [_solve_case(job) for job in jobs]

    stats = ErrorStats(dataset=name, variant=variant, count=len(cases))
    if keep_rows:
        stats.per_case = []
    for case, v_hat in zip(cases, solved):
        err_ulp = ulp_error(v_hat, case.v_ref)
        err_abs = abs(v_hat - case.v_ref)
        if err_ulp > stats.max_ulp:
            stats.max_ulp = err_ulp
            stats.worst_case_id = case.case_id
        stats.max_abs_vol = max(stats.max_abs_vol, err_abs)
        if stats.per_case is not None:
            stats.per_case.append(
                {
                    "case_id": case.case_id,
                    "x": case.x,
                    "c": case.c,
                    "v_ref": case.v_ref,
                    "v_hat": v_hat,
                    "ulp_error": err_ulp,
                    "abs_error": err_abs,
                }
            )

    duration_ms = (time.time() - start_time) * 1000
    log_benchmark_run(
        logger,
        name,
        variant,
        "accuracy",
        duration_ms,
        count=stats.count,
        max_ulp=stats.max_ulp,
        max_abs_vol=stats.max_abs_vol,
    )
    return stats


def run_latency(
    cases: Sequence[BenchCase],
    variant: SolverVariant = "unpolished",
    sweeps: Optional[int] = None,
    runs: Optional[int] = None,
    warmup: Optional[int] = None,
) -> float:
    """Nanoseconds per call: the fastest full sweep over all runs, per case.

    Sweeps are single-threaded. The first ``warmup`` sweeps of every run are
    discarded.
    """
    sweeps = sweeps or LATENCY_SWEEPS
    runs = runs or LATENCY_RUNS
    warmup = LATENCY_WARMUP if warmup is None else warmup
    if not cases:
        return math.nan

    polish = variant == "polished"
    quotes = [(case.x, case.c, case.expiry) for case in cases]
    start_time = time.time()

    best_ns = math.inf
    for _ in range(runs):
        for sweep in range(warmup + sweeps):
            t0 = time.perf_counter_ns()
            for x, c, expiry in quotes:
                solve(x, c, expiry, polish)
            elapsed = time.perf_counter_ns() - t0
            if sweep >= warmup:
                best_ns = min(best_ns, elapsed)

    ns_per_call = best_ns / len(quotes)
    log_benchmark_run(
        logger,
        cases[0].dataset,
        variant,
        "latency",
        (time.time() - start_time) * 1000,
        sweeps=sweeps,
        runs=runs,
        ns_per_call=ns_per_call,
    )
    return ns_per_call


def round_trip_violations(
    cases: Sequence[BenchCase], variant: SolverVariant = "unpolished"
) -> List[Dict[str, Any]]:
    """Cases whose oracle reprice misses c by more than the conditioning bound.

    The bound is max(4 ulps of c, vega * 4 ulps of v_hat) with vega = dc/dv.
    """
    polish = variant == "polished"
    violations = []
    for case in cases:
        v_hat = solve(case.x, case.c, case.expiry, polish).total_vol
        if not v_hat > 0.0:
            continue
        residual = abs(to_double(hp_price(case.x, v_hat)) - case.c)
        vega = norm_pdf(case.x / v_hat + 0.5 * v_hat)
        bound = max(4.0 * ulp_up(case.c), vega * 4.0 * ulp_up(v_hat))
        if residual > bound:
            violations.append(
                {"case_id": case.case_id, "residual": residual, "bound": bound}
            )
    return violations


# ============================================================================
# Pricing diagnostics
# ============================================================================


def _relative_error(value: float, reference) -> float:
    with mp.workdps(ORACLE_DIGITS):
        return float(abs(mp.mpf(value) - reference) / reference)


def _ulp_sweep(v0: float, length: int = SWEEP_LENGTH) -> List[float]:
    values = [v0]
    for _ in range(length - 1):
        values.append(next_up(values[-1]))
    return values


def pricing_sweep_rows(scenario: str) -> List[Dict[str, Any]]:
    """Relative error of each pricing path over 512 successive doubles of v."""
    ex, v0 = PRICING_SCENARIOS[scenario]
    x = math.log(ex)
    rows = []
    for i, v in enumerate(_ulp_sweep(v0)):
        c_ref = hp_price(x, v)
        row: Dict[str, Any] = {"scenario": scenario, "step": i, "v": v}
        row["c_ref"] = to_double(c_ref)
        for path in PRICING_PATHS:
            row[f"rel_err_{path}"] = _relative_error(price_by_path(x, v, path), c_ref)
        rows.append(row)
    return rows


def sweep_max_errors(rows: Sequence[Dict[str, Any]]) -> Dict[str, float]:
    return {path: max(row[f"rel_err_{path}"] for row in rows) for path in PRICING_PATHS}


def price_step_rows(scenario: str = STEP_SCENARIO) -> List[Dict[str, Any]]:
    """Signed price change per one-ulp increase of v, in ulps of the start price."""
    ex, v0 = PRICING_SCENARIOS[scenario]
    x = math.log(ex)
    values = _ulp_sweep(v0, SWEEP_LENGTH + 1)
    unit = ulp_up(to_double(hp_price(x, v0)))
    prices = {
        path: [price_by_path(x, v, path) for v in values] for path in PRICING_PATHS
    }
    rows = []
    for i in range(SWEEP_LENGTH):
        row: Dict[str, Any] = {"scenario": scenario, "step": i, "v": values[i]}
        for path in PRICING_PATHS:
            row[f"step_{path}"] = (prices[path][i + 1] - prices[path][i]) / unit
        rows.append(row)
    return rows


@dataclass(frozen=True, slots=True)
class PricingRegime:
    """Quoted-price grid for the regime-level pricing comparison."""

    name: str
    moneyness: Tuple[float, ...]
    expiries: Tuple[float, ...]
    sigmas: Tuple[float, ...]
    c_min: float
    c_max: float
    c_max_inclusive: bool = True

    def admits(self, c: float) -> bool:
        upper = c <= self.c_max if self.c_max_inclusive else c < self.c_max
        return self.c_min <= c and upper


_BROAD_MONEYNESS = _linspace(0.80, 0.995, 12)
_BROAD_EXPIRIES = (1 / 252, 5 / 252, 21 / 252, 63 / 252, 0.5, 1.0)
_BROAD_SIGMAS = _linspace(0.10, 1.20, 12)

PRICING_REGIMES: Tuple[PricingRegime, ...] = (
    PricingRegime(
        "broad_otm", _BROAD_MONEYNESS, _BROAD_EXPIRIES, _BROAD_SIGMAS, 1e-8, 5e-2
    ),
    PricingRegime(
        "tiny_premium",
        _BROAD_MONEYNESS,
        _BROAD_EXPIRIES,
        _BROAD_SIGMAS,
        1e-12,
        1e-8,
        c_max_inclusive=False,
    ),
    PricingRegime(
        "near_atm_short",
        _linspace(0.99, 0.9995, 8),
        (1 / 252, 2 / 252, 5 / 252, 10 / 252),
        _linspace(0.05, 0.80, 8),
        0.0,
        5e-2,
    ),
)


def pricing_regime_errors() -> List[Dict[str, Any]]:
    """p99 and max relative error of each pricing path on each regime grid."""
    rows = []
    for regime in PRICING_REGIMES:
        errors: Dict[str, List[float]] = {path: [] for path in PRICING_PATHS}
        grid = product(regime.moneyness, regime.expiries, regime.sigmas)
        for ex, expiry, sigma in grid:
            x, v = math.log(ex), sigma * math.sqrt(expiry)
            c_ref = hp_price(x, v)
            if not regime.admits(to_double(c_ref)):
                continue
            for path in PRICING_PATHS:
                errors[path].append(_relative_error(price_by_path(x, v, path), c_ref))
        for path in PRICING_PATHS:
            values = errors[path]
            p99 = float(np.percentile(values, 99)) if values else math.nan
            rows.append(
                {
                    "regime": regime.name,
                    "path": path,
                    "count": len(values),
                    "p99_rel_err": p99,
                    "max_rel_err": max(values) if values else math.nan,
                }
            )
    return rows


# ============================================================================
# Solver diagnostics
# ============================================================================

BRANCH_MAP_MONEYNESS = (0.0,) + tuple(np.logspace(-12, 1, 27).tolist())
BRANCH_MAP_LOGITS = _linspace(-40.0, 13.8, 28)

CONVERGENCE_SLICES = (-0.01, -0.25, -1.0, -3.0)
CONVERGENCE_VOLS = tuple(np.logspace(-2, 0.5, 25).tolist())

ROUND_TRIP_SLICES = (-1e-8, -1e-3, -0.1, -1.0)
ROUND_TRIP_VOLS = tuple(np.logspace(-4, 0, 25).tolist())


def branch_map_rows() -> List[Dict[str, Any]]:
    """Branch tags taken by the solver over the (m, c) plane."""
    rows = []
    for m, z in product(BRANCH_MAP_MONEYNESS, BRANCH_MAP_LOGITS):
        c = 1.0 / (1.0 + math.exp(-z))
        if not 0.0 < c < C_UPPER_LIMIT:
            continue
        result = solve(-m, c)
        rows.append(
            {
                "m": m,
                "c": c,
                "first_branch": result.branch_path[0],
                "last_branch": result.branch_path[-1],
                "total_vol": result.total_vol,
            }
        )
    return rows


def convergence_rows() -> List[Dict[str, Any]]:
    """Relative error after the seed and after each refinement step."""
    rows = []
    for x, v in product(CONVERGENCE_SLICES, CONVERGENCE_VOLS):
        c = to_double(hp_price(x, v))
        if not (0.0 < c < C_UPPER_LIMIT and math.log(c) >= LOG_C_FLOOR):
            continue
        v_star = to_double(hp_implied_vol(x, c))
        trace = refine3(x, c, choi_l3(x, c).v0)
        iterates = list(trace.iterates)
        iterates += [iterates[-1]] * (4 - len(iterates))
        row: Dict[str, Any] = {"x": x, "v_ref": v, "c": c, "v_star": v_star}
        for label, value in zip(("seed", "step1", "step2", "step3"), iterates):
            row[f"err_{label}"] = max(abs(value - v_star) / v_star, FIGURE_ERROR_FLOOR)
        rows.append(row)
    return rows


def polish_round_trip_rows() -> List[Dict[str, Any]]:
    """Round trip against prices generated by the expanded evaluator."""
    rows = []
    for x, v in product(ROUND_TRIP_SLICES, ROUND_TRIP_VOLS):
        c = price_by_path(x, v, "expanded")
        if not 0.0 < c < C_UPPER_LIMIT:
            continue
        row: Dict[str, Any] = {"x": x, "v": v, "c": c}
        for variant, polish in (("unpolished", False), ("polished", True)):
            v_hat = solve(x, c, 1.0, polish).total_vol
            repriced = price_by_path(x, v_hat, "expanded") if v_hat > 0.0 else 0.0
            row[f"vol_rel_err_{variant}"] = abs(v_hat - v) / v
            row[f"price_rel_residual_{variant}"] = abs(repriced - c) / c
        rows.append(row)
    return rows


def polish_band_movements(cases: Sequence[BenchCase]) -> Dict[str, Any]:
    """Effect of extending the polish from c <= cJ up to c <= 1/2.

    Inside the band cJ < c <= 1/2 only the "half" cutoff polishes. Residuals
    are oracle reprices in ulps of c.
    """
    band = [case for case in cases if C_J < case.c <= 0.5]
    better = worse = same = 0
    max_gain = max_loss = 0.0
    max_vol_move = 0.0
    for case in band:
        v_cj = solve(case.x, case.c, case.expiry, True, "cJ").total_vol
        v_half = solve(case.x, case.c, case.expiry, True, "half").total_vol
        unit = ulp_up(case.c)
        r_cj = abs(to_double(hp_price(case.x, v_cj)) - case.c) / unit
        r_half = abs(to_double(hp_price(case.x, v_half)) - case.c) / unit
        if r_half < r_cj:
            better += 1
            max_gain = max(max_gain, r_cj - r_half)
        elif r_half > r_cj:
            worse += 1
            max_loss = max(max_loss, r_half - r_cj)
        else:
            same += 1
        max_vol_move = max(max_vol_move, abs(v_half - v_cj) / ulp_up(v_cj))
    return {
        "band_count": len(band),
        "better": better,
        "worse": worse,
        "same": same,
        "max_gain_price_ulps": max_gain,
        "max_loss_price_ulps": max_loss,
        "max_vol_movement_ulps": max_vol_move,
    }


def emit_figure_data(
    which: FigureName, reference_dir: Optional[Path] = None
) -> List[Dict[str, Any]]:
    """Rows of one diagnostic figure or experiment table.

    Raises:
        InvalidInput: If ``which`` is unknown
        MissingReferenceTable: For ``polish_bands`` without persisted tables
    """
    if which == "fig1_sweeps":
        rows: List[Dict[str, Any]] = []
        for scenario in PRICING_SCENARIOS:
            rows.extend(pricing_sweep_rows(scenario))
        return rows
    if which == "fig2_steps":
        return price_step_rows()
    if which == "fig3_branchmap":
        return branch_map_rows()
    if which == "fig4_convergence":
        return convergence_rows()
    if which == "fig5_roundtrip":
        return polish_round_trip_rows()
    if which == "pricing_regimes":
        return pricing_regime_errors()
    if which == "polish_bands":
        rows = []
        for name in DATASET_NAMES:
            cases = build_dataset(name, reference_dir=reference_dir)
            rows.append({"dataset": name, **polish_band_movements(cases)})
        return rows
    raise InvalidInput(f"Unknown figure: {which}", "which", which)


# ============================================================================
# Results sink
# ============================================================================


def json_safe(value: Any) -> Any:
    """Replace non-finite floats by None, recursively."""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    return value


def write_summary_json(path: Path, rows: Sequence[Dict[str, Any]]) -> Path:
    """Write rows as a JSON array; non-finite floats become null."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(json_safe(list(rows)), indent=2, sort_keys=True) + "\n")
    return path


def write_rows_csv(path: Path, rows: Sequence[Dict[str, Any]]) -> Path:
    """Write rows as CSV. Every float column is followed by a ``<name>_hex`` column."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if not rows:
        path.write_text("")
        return path

    columns: List[str] = []
    for key, value in rows[0].items():
        columns.append(key)
        if isinstance(value, float):
            columns.append(f"{key}_hex")

    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        for row in rows:
            out = dict(row)
            for key, value in row.items():
                if isinstance(value, float):
                    out[f"{key}_hex"] = float_to_hex(value)
            writer.writerow(out)
    return path
