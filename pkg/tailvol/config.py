#!/usr/bin/env python3
"""Configuration management for tailvol."""

from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from .utils.exceptions import ConfigurationError

PACKAGE_DIR = Path(__file__).resolve().parent


class SpecFunConfig(BaseModel):
    """Tuning constants of the special-function kernels."""

    model_config = ConfigDict(frozen=True)

    erfcx_switch_point: float = Field(
        default=50.0,
        gt=0.0,
        description="Argument above which erfcx uses the continued-fraction tail",
    )
    invcdf_tail_cut: float = Field(
        default=0.02425,
        gt=0.0,
        lt=0.5,
        description="Probability splitting the central and tail inverse-cdf rationals",
    )


class Settings(BaseSettings):
    """Application settings with environment variable support."""

    model_config = SettingsConfigDict(
        env_prefix="TAILVOL_",
        env_nested_delimiter="__",
        case_sensitive=False,
        extra="forbid",
    )

    # Special functions
    specfun: SpecFunConfig = Field(default_factory=SpecFunConfig)

    # Solver
    polish_cutoff: str = Field(
        default="half", description="Polish cutoff on c (half or cJ)"
    )
    default_variant: str = Field(
        default="unpolished", description="Solver variant (unpolished or polished)"
    )

    # Oracle
    oracle_digits: int = Field(
        default=50, ge=50, le=2000, description="Working decimal digits of the oracle"
    )
    oracle_deep_digits: int = Field(
        default=120, ge=120, le=4000, description="Digits for deep-tail checks"
    )
    oracle_guard_digits: int = Field(
        default=20, ge=5, le=500, description="Extra digits added per escalation"
    )
    oracle_max_escalations: int = Field(
        default=3, ge=0, le=10, description="Precision escalations before giving up"
    )

    # Benchmarks
    reference_dir: Path = Field(
        default=PACKAGE_DIR / "data",
        description="Directory holding persisted reference tables",
    )
    reference_cache_size: int = Field(
        default=16, ge=1, le=256, description="Loaded reference tables kept in memory"
    )
    latency_sweeps: int = Field(
        default=500, ge=1, le=100000, description="Timed sweeps per latency run"
    )
    latency_runs: int = Field(
        default=3, ge=1, le=100, description="Independent latency runs"
    )
    latency_warmup: int = Field(
        default=10, ge=0, le=1000, description="Discarded warm-up sweeps"
    )
    accuracy_workers: int = Field(
        default=1, ge=1, le=256, description="Worker processes for accuracy runs"
    )

    # Logging Configuration
    log_level: str = Field(default="WARNING", description="Logging level")
    log_format: str = Field(default="json", description="Log format (json or text)")
    log_include_extra: bool = Field(
        default=True, description="Include extra fields in JSON logs"
    )

    @field_validator("polish_cutoff")
    @classmethod
    def validate_polish_cutoff(cls, v):
        valid_cutoffs = {"half": "half", "cj": "cJ"}
        if v.lower() not in valid_cutoffs:
            raise ValueError("Polish cutoff must be one of: ['half', 'cJ']")
        return valid_cutoffs[v.lower()]

    @field_validator("default_variant")
    @classmethod
    def validate_default_variant(cls, v):
        valid_variants = ["unpolished", "polished"]
        if v.lower() not in valid_variants:
            raise ValueError(f"Solver variant must be one of: {valid_variants}")
        return v.lower()

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v):
        valid_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        if v.upper() not in valid_levels:
            raise ValueError(f"Log level must be one of: {valid_levels}")
        return v.upper()

    @field_validator("log_format")
    @classmethod
    def validate_log_format(cls, v):
        valid_formats = ["json", "text"]
        if v.lower() not in valid_formats:
            raise ValueError(f"Log format must be one of: {valid_formats}")
        return v.lower()


def load_settings(**overrides) -> Settings:
    """Build a Settings instance, mapping validation failures to ConfigurationError.

    Args:
        **overrides: Field values taking precedence over the environment

    Returns:
        Validated settings

    Raises:
        ConfigurationError: If any field is invalid
    """
    try:
        return Settings(**overrides)
    except ValidationError as e:
        first = e.errors()[0]
        key = ".".join(str(part) for part in first.get("loc", ()))
        raise ConfigurationError(f"Invalid configuration: {first['msg']}", key) from e


# Global settings instance
settings = load_settings()

# Special functions
ERFCX_SWITCH_POINT = settings.specfun.erfcx_switch_point
INVCDF_TAIL_CUT = settings.specfun.invcdf_tail_cut

# Solver
POLISH_CUTOFF = settings.polish_cutoff
DEFAULT_VARIANT = settings.default_variant

# Oracle
ORACLE_DIGITS = settings.oracle_digits
ORACLE_DEEP_DIGITS = settings.oracle_deep_digits
ORACLE_GUARD_DIGITS = settings.oracle_guard_digits
ORACLE_MAX_ESCALATIONS = settings.oracle_max_escalations

# Benchmarks
REFERENCE_DIR = settings.reference_dir
REFERENCE_CACHE_SIZE = settings.reference_cache_size
LATENCY_SWEEPS = settings.latency_sweeps
LATENCY_RUNS = settings.latency_runs
LATENCY_WARMUP = settings.latency_warmup
ACCURACY_WORKERS = settings.accuracy_workers

# Logging
LOG_LEVEL = settings.log_level
LOG_FORMAT = settings.log_format
LOG_INCLUDE_EXTRA = settings.log_include_extra
