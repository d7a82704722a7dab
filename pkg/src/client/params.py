"""Mechanism parameters and the DP noise-bound check."""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.integrity.stream import IntegrityPolicy
from src.ring.field import DEFAULT_MODULUS

C_MAD = 1.4826


class OutputMode(str, Enum):
    """Aggregate as a normalized weighted sum, or as a sign vector."""

    WEIGHTED = "weighted"
    SIGN = "sign"


class RainParams(BaseModel):
    """Per-round mechanism parameters shared by clients and servers."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    epsilon: float = Field(gt=0)
    delta: float = Field(default=0.0, ge=0, lt=1)
    sigma: float = Field(gt=0)
    clip: float = Field(gt=0)
    sensitivity: float = Field(gt=0, description="Delta_g, defaults to 2 * clip")
    lambda_mad: float = Field(default=1.0, ge=0)
    c_mad: float = C_MAD
    modulus: int = DEFAULT_MODULUS
    output_mode: OutputMode = OutputMode.SIGN
    integrity: IntegrityPolicy = IntegrityPolicy.HALT

    @model_validator(mode="before")
    @classmethod
    def _default_sensitivity(cls, data: Any) -> Any:
        if isinstance(data, dict) and data.get("sensitivity") is None and "clip" in data:
            data = {**data, "sensitivity": 2 * float(data["clip"])}
        return data

    @field_validator("c_mad")
    @classmethod
    def _fixed_c_mad(cls, value: float) -> float:
        if value != C_MAD:
            raise ValueError(f"c_mad is fixed at {C_MAD}")
        return value

    @field_validator("modulus")
    @classmethod
    def _odd_modulus(cls, value: int) -> int:
        if value < 3 or value % 2 == 0 or value >= 1 << 64:
            raise ValueError("modulus must be an odd prime below 2^64")
        return value


@dataclass
class DpReport:
    """Result of checking sigma against max(2|g|/3, 4 * Delta_g / epsilon)."""

    ok: bool
    sigma: float
    clip_term: float
    sensitivity_term: float
    failing_terms: list[str] = field(default_factory=list)

    @property
    def bound(self) -> float:
        return max(self.clip_term, self.sensitivity_term)

    @property
    def minimal_compliant_sigma(self) -> float:
        """Smallest float strictly above the bound."""
        return math.nextafter(self.bound, math.inf)

    def message(self) -> str:
        if self.ok:
            return f"sigma={self.sigma} satisfies the DP bound {self.bound}"
        return (
            f"sigma={self.sigma} violates the DP bound (failing: {', '.join(self.failing_terms)}); "
            f"minimal compliant sigma is {self.minimal_compliant_sigma!r} (must exceed {self.bound!r})"
        )


def validate_dp(params: RainParams, max_abs_g: float | None = None) -> DpReport:
    """
    Check sigma > max(2|g|/3, 4 * Delta_g / epsilon) with strict inequality.

    Args:
        params: Mechanism parameters
        max_abs_g: Largest |g| to certify against, defaults to the clip bound C

    Returns:
        DpReport naming each failing term
    """
    g = params.clip if max_abs_g is None else abs(max_abs_g)
    clip_term = 2.0 * g / 3.0
    sensitivity_term = 4.0 * params.sensitivity / params.epsilon

    failing = []
    if not params.sigma > clip_term:
        failing.append("clip_term")
    if not params.sigma > sensitivity_term:
        failing.append("sensitivity_term")

    return DpReport(
        ok=not failing,
        sigma=params.sigma,
        clip_term=clip_term,
        sensitivity_term=sensitivity_term,
        failing_terms=failing,
    )


def minimal_sigma(clip: float, sensitivity: float, epsilon: float, margin: float = 1.0) -> float:
    """Bound value times margin; margin must exceed 1 for a compliant sigma."""
    return max(2.0 * clip / 3.0, 4.0 * sensitivity / epsilon) * margin
