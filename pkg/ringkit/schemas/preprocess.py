"""Pydantic schemas for filters and preprocessing plans."""
from typing import List, Literal, Optional, Union

from pydantic import BaseModel, Field, model_validator
from typing_extensions import Annotated, Self


class FilterSpec(BaseModel):
    """Zero-phase band-pass filter parameters."""

    low_hz: float = Field(..., gt=0, description="Lower passband edge")
    high_hz: float = Field(..., gt=0, description="Upper passband edge")
    order: int = Field(4, ge=1, le=10, description="Butterworth order")

    @model_validator(mode="after")
    def validate_band(self) -> Self:
        """Validate that low_hz < high_hz."""
        if self.low_hz >= self.high_hz:
            raise ValueError("low_hz must be below high_hz")
        return self

    model_config = {"frozen": True, "extra": "forbid"}


class StandardizeStep(BaseModel):
    """Zero-mean unit-variance normalization."""

    op: Literal["standardize"] = "standardize"

    model_config = {"frozen": True, "extra": "forbid"}


class FilterStep(FilterSpec):
    """Band-pass filtering step; carries the FilterSpec fields inline."""

    op: Literal["filter"] = "filter"

    def spec(self) -> FilterSpec:
        return FilterSpec(low_hz=self.low_hz, high_hz=self.high_hz, order=self.order)


class DiffNormStep(BaseModel):
    """First difference followed by standardization."""

    op: Literal["diffnorm"] = "diffnorm"

    model_config = {"frozen": True, "extra": "forbid"}


class SpectralStep(BaseModel):
    """Power spectral density; must be the last step of a plan."""

    op: Literal["spectral"] = "spectral"
    segment_s: float = Field(10.0, gt=0)
    overlap: float = Field(0.5, ge=0, lt=1)
    window: Literal["hann", "hamming", "boxcar"] = "hann"
    method: Literal["welch", "periodogram"] = "welch"

    model_config = {"frozen": True, "extra": "forbid"}


PreprocessStep = Annotated[
    Union[StandardizeStep, FilterStep, DiffNormStep, SpectralStep],
    Field(discriminator="op"),
]


class PreprocessPlan(BaseModel):
    """Ordered list of preprocessing steps."""

    steps: List[PreprocessStep] = Field(default_factory=list)

    @model_validator(mode="after")
    def validate_spectral_last(self) -> Self:
        """Validate that a spectral step, if any, is the single last step."""
        positions = [i for i, step in enumerate(self.steps) if isinstance(step, SpectralStep)]
        if len(positions) > 1:
            raise ValueError("a plan may contain at most one spectral step")
        if positions and positions[0] != len(self.steps) - 1:
            raise ValueError("the spectral step must be the last step of a plan")
        return self

    @property
    def spectral(self) -> Optional[SpectralStep]:
        """Final spectral step, if present."""
        if self.steps and isinstance(self.steps[-1], SpectralStep):
            return self.steps[-1]
        return None

    @property
    def time_steps(self) -> list:
        """Steps before the spectral step."""
        return self.steps[:-1] if self.spectral is not None else list(self.steps)

    model_config = {"frozen": True, "extra": "forbid"}
