"""Pydantic schemas for estimator parameters."""
from pydantic import BaseModel, Field, model_validator
from typing_extensions import Self

from ringkit.models.session import RingType
from ringkit.models.vital import VitalKind
from ringkit.schemas.preprocess import FilterSpec


class RateBand(BaseModel):
    """Physiological rate limits and the filter isolating them."""

    kind: VitalKind
    min_per_min: float = Field(..., gt=0)
    max_per_min: float = Field(..., gt=0)
    filter: FilterSpec

    @model_validator(mode="after")
    def validate_band(self) -> Self:
        """Validate kind and limits."""
        if not self.kind.is_rate:
            raise ValueError(f"rate bands apply to hr and rr, not {self.kind.value}")
        if self.min_per_min >= self.max_per_min:
            raise ValueError("min_per_min must be below max_per_min")
        return self

    @property
    def min_hz(self) -> float:
        return self.min_per_min / 60.0

    @property
    def max_hz(self) -> float:
        return self.max_per_min / 60.0

    def contains(self, per_min: float) -> bool:
        """Check if a rate lies inside the band limits."""
        return self.min_per_min <= per_min <= self.max_per_min

    @classmethod
    def for_kind(cls, kind: VitalKind) -> "RateBand":
        """Default band of a rate kind.

        Raises:
            ValueError: If kind is not HR or RR
        """
        kind = VitalKind(kind)
        if kind == VitalKind.HR:
            return cls(kind=kind, min_per_min=30, max_per_min=180, filter=FilterSpec(low_hz=0.5, high_hz=3.0))
        if kind == VitalKind.RR:
            return cls(kind=kind, min_per_min=6, max_per_min=30, filter=FilterSpec(low_hz=0.1, high_hz=0.5))
        raise ValueError(f"no rate band for {kind.value}")

    model_config = {"frozen": True, "extra": "forbid"}


class SpO2Calibration(BaseModel):
    """Linear calibration SpO2 = a - b * R."""

    a: float = Field(..., ge=80, le=110, description="Intercept in percent")
    b: float = Field(..., description="Slope in percent per unit ratio")

    @classmethod
    def for_ring(cls, ring_type: RingType) -> "SpO2Calibration":
        """Default calibration of a ring's optical path."""
        if RingType(ring_type) == RingType.TRANSMISSIVE:
            return cls(a=87.0, b=-6.0)
        return cls(a=99.0, b=6.0)

    def spo2(self, ratio: float) -> float:
        return self.a - self.b * ratio

    def ratio_for(self, spo2: float) -> float:
        """Ratio that maps to a given saturation."""
        return (self.a - spo2) / self.b

    model_config = {"frozen": True, "extra": "forbid"}
