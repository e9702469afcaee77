#!/usr/bin/env python3
"""Input validation models for quotes and CLI commands."""

import math
from pathlib import Path
from typing import Any, Dict, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .exceptions import InvalidInput

OptionKind = Literal["call", "put"]
PricingPath = Literal["cdf", "erfcxlog", "expanded"]
SolverVariant = Literal["unpolished", "polished"]
DatasetName = Literal[
    "CLY3D", "CLY20", "CLY80", "Jaeckel", "Market", "Corners", "Stress", "HighVol"
]
FigureName = Literal[
    "fig1_sweeps",
    "fig2_steps",
    "fig3_branchmap",
    "fig4_convergence",
    "fig5_roundtrip",
    "pricing_regimes",
    "polish_bands",
]


def _require_finite(v: float) -> float:
    if not math.isfinite(v):
        raise ValueError("value must be finite")
    return v


class RawQuote(BaseModel):
    """An undiscounted European option quote on a forward."""

    model_config = ConfigDict(frozen=True)

    option_kind: OptionKind = Field(..., description="call or put")
    forward: float = Field(..., gt=0.0, description="Forward price F")
    strike: float = Field(..., gt=0.0, description="Strike K")
    expiry: float = Field(..., gt=0.0, description="Time to expiry in years")
    price: float = Field(..., ge=0.0, description="Undiscounted option price")

    @field_validator("forward", "strike", "expiry", "price")
    @classmethod
    def validate_finite(cls, v):
        return _require_finite(v)

    @classmethod
    def from_spot(
        cls,
        option_kind: OptionKind,
        spot: float,
        rate: float,
        expiry: float,
        strike: float,
        price: float,
    ) -> "RawQuote":
        """Build a quote from spot and a flat continuously compounded rate."""
        return cls(
            option_kind=option_kind,
            forward=spot * math.exp(rate * expiry),
            strike=strike,
            expiry=expiry,
            price=price,
        )


class InvertRequest(BaseModel):
    """Validation model for the invert command."""

    kind: OptionKind
    forward: Optional[float] = Field(None, gt=0.0)
    spot: Optional[float] = Field(None, gt=0.0)
    rate: float = 0.0
    strike: float = Field(..., gt=0.0)
    expiry: float = Field(..., gt=0.0)
    price: float = Field(..., ge=0.0)
    polish: bool = False
    json_output: bool = False

    @field_validator("forward", "spot", "rate", "strike", "expiry", "price")
    @classmethod
    def validate_finite(cls, v):
        if v is None:
            return v
        return _require_finite(v)

    def to_quote(self) -> RawQuote:
        if self.forward is not None and self.spot is not None:
            raise InvalidInput("Give either --forward or --spot, not both", "forward")
        if self.forward is not None:
            return validate_quote(
                option_kind=self.kind,
                forward=self.forward,
                strike=self.strike,
                expiry=self.expiry,
                price=self.price,
            )
        if self.spot is None:
            raise InvalidInput("One of --forward or --spot is required", "forward")
        try:
            forward = self.spot * math.exp(self.rate * self.expiry)
        except OverflowError:
            raise InvalidInput("Forward overflows", "rate", self.rate)
        return validate_quote(
            option_kind=self.kind,
            forward=forward,
            strike=self.strike,
            expiry=self.expiry,
            price=self.price,
        )


class PriceRequest(BaseModel):
    """Validation model for the price command."""

    x: float = Field(..., le=0.0)
    v: float = Field(..., gt=0.0)
    path: PricingPath = "erfcxlog"
    json_output: bool = False

    @field_validator("x", "v")
    @classmethod
    def validate_finite(cls, v):
        return _require_finite(v)


class BenchRequest(BaseModel):
    """Validation model for the bench command."""

    dataset: DatasetName
    variant: SolverVariant = "unpolished"
    accuracy: bool = False
    latency: bool = False
    sweeps: Optional[int] = Field(None, ge=1)
    runs: Optional[int] = Field(None, ge=1)
    workers: Optional[int] = Field(None, ge=1)
    out: Optional[Path] = None
    json_output: bool = False


class DatasetsRequest(BaseModel):
    """Validation model for the datasets command."""

    names: list[DatasetName] = Field(default_factory=list)
    regenerate: bool = False
    workers: Optional[int] = Field(None, ge=1)
    json_output: bool = False


class FigdataRequest(BaseModel):
    """Validation model for the figdata command."""

    which: FigureName
    out: Optional[Path] = None


class OracleRequest(BaseModel):
    """Validation model for the oracle command."""

    mode: Literal["price", "ivol"]
    x: float = Field(..., le=0.0)
    v: Optional[float] = Field(None, gt=0.0)
    c: Optional[float] = Field(None, gt=0.0, lt=1.0)
    digits: int = Field(50, ge=50, le=2000)
    json_output: bool = False

    @field_validator("x", "v", "c")
    @classmethod
    def validate_finite(cls, v):
        if v is None:
            return v
        return _require_finite(v)


def validate_command_request(command: str, arguments: Dict[str, Any]) -> BaseModel:
    """Validate CLI command arguments.

    Args:
        command: Subcommand name
        arguments: Parsed flag values

    Returns:
        Validated request model

    Raises:
        InvalidInput: If validation fails
    """
    validation_models = {
        "invert": InvertRequest,
        "price": PriceRequest,
        "bench": BenchRequest,
        "datasets": DatasetsRequest,
        "figdata": FigdataRequest,
        "oracle": OracleRequest,
    }

    if command not in validation_models:
        raise InvalidInput(f"Unknown command: {command}", "command", command)

    try:
        return validation_models[command](**arguments)
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(part) for part in first.get("loc", ()))
        raise InvalidInput(
            f"Validation failed: {field}: {first['msg']}", field, first.get("input")
        )


def validate_quote(**fields: Any) -> RawQuote:
    """Construct a RawQuote, reporting failures as InvalidInput."""
    try:
        return RawQuote(**fields)
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(part) for part in first.get("loc", ()))
        raise InvalidInput(
            f"Invalid quote: {field}: {first['msg']}", field, first.get("input")
        )
