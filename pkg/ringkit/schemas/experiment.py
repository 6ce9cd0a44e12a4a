"""Pydantic schemas for experiment configuration files."""
import enum
from typing import List, Literal, Optional

from pydantic import BaseModel, Field, field_validator, model_validator
from typing_extensions import Self

from ringkit.config import settings
from ringkit.models.channel import Channel
from ringkit.models.session import RingType
from ringkit.models.vital import VitalKind
from ringkit.schemas.preprocess import PreprocessPlan
from ringkit.schemas.synth import CohortSpec, SynthSpec


class EstimationMethod(str, enum.Enum):
    """Enum for estimation methods."""

    PEAK = "peak"
    FFT = "fft"
    RATIO = "ratio"
    RIDGE = "ridge"

    @property
    def is_physics(self) -> bool:
        """Check if method needs no training."""
        return self != EstimationMethod.RIDGE


class DatasetConfig(BaseModel):
    """Where sessions come from: a directory, explicit synth specs, or a cohort."""

    root: Optional[str] = None
    synth: Optional[List[SynthSpec]] = None
    cohort: Optional[CohortSpec] = None

    @model_validator(mode="after")
    def validate_single_source(self) -> Self:
        """Validate that exactly one source is given."""
        sources = [name for name in ("root", "synth", "cohort") if getattr(self, name) is not None]
        if len(sources) != 1:
            raise ValueError(f"dataset needs exactly one of root, synth, cohort; got {sources or 'none'}")
        if self.synth is not None and not self.synth:
            raise ValueError("dataset.synth must not be empty")
        return self

    model_config = {"extra": "forbid"}


class WindowingConfig(BaseModel):
    """Window tiling parameters."""

    duration_s: float = Field(default_factory=lambda: settings.WINDOW_DURATION_S, gt=0)
    rate_hz: float = Field(default_factory=lambda: settings.RESAMPLE_RATE_HZ, gt=0)
    stride_s: Optional[float] = Field(None, gt=0, description="Defaults to duration_s")
    gate_hz: float = Field(default_factory=lambda: settings.RATE_GATE_HZ, gt=0)

    @property
    def resolved_stride_s(self) -> float:
        return self.stride_s if self.stride_s is not None else self.duration_s

    model_config = {"extra": "forbid"}


class FoldConfig(BaseModel):
    """Cross-validation parameters."""

    k: int = Field(5, ge=2)
    seed: Optional[int] = Field(None, ge=0, description="Defaults to the experiment seed")

    model_config = {"extra": "forbid"}


class TrainingConfig(BaseModel):
    """Ridge training parameters.

    ``epochs`` and ``batch_size`` are accepted for configs written for deep
    backbones; the closed-form ridge baseline ignores them.
    """

    lambda_grid: List[float] = Field(default_factory=lambda: settings.ridge_lambda_grid, min_length=1)
    epochs: Optional[int] = Field(None, ge=1)
    batch_size: Optional[int] = Field(None, ge=1)

    @field_validator("lambda_grid")
    @classmethod
    def validate_grid(cls, v: List[float]) -> List[float]:
        """Validate that penalties are nonnegative and sort them."""
        if any(value < 0 for value in v):
            raise ValueError("ridge penalties must be nonnegative")
        return sorted(set(v))

    @property
    def inapplicable_fields(self) -> List[str]:
        """Fields set in the config that the ridge baseline ignores."""
        return [name for name in ("epochs", "batch_size") if getattr(self, name) is not None]

    model_config = {"extra": "forbid"}


class CalibrationConfig(BaseModel):
    """SpO2 calibration for the ratio method."""

    mode: Literal["ring_default", "fixed", "fit"] = "ring_default"
    a: Optional[float] = Field(None, ge=80, le=110)
    b: Optional[float] = None

    @model_validator(mode="after")
    def validate_fixed(self) -> Self:
        """Validate that fixed mode carries both coefficients."""
        if self.mode == "fixed" and (self.a is None or self.b is None):
            raise ValueError("spo2_calibration mode 'fixed' requires a and b")
        return self

    model_config = {"extra": "forbid"}


class EvalConfig(BaseModel):
    """Evaluation parameters."""

    stratify_by: List[Literal["scenario", "activity"]] = Field(default_factory=lambda: ["scenario"])
    include_out_of_band: bool = True
    merge_mode: Literal["pooled", "mean_of_folds"] = "pooled"

    model_config = {"extra": "forbid"}


class ExperimentConfig(BaseModel):
    """Declarative description of one experiment run."""

    schema_version: Literal[1] = 1
    dataset: DatasetConfig
    task: VitalKind
    method: EstimationMethod
    channels: List[Channel] = Field(..., min_length=1)
    ring_type: Optional[RingType] = Field(None, description="Keep only sessions of this ring type")
    windowing: WindowingConfig = Field(default_factory=WindowingConfig)
    preprocess: Optional[PreprocessPlan] = None
    folds: FoldConfig = Field(default_factory=FoldConfig)
    training: TrainingConfig = Field(default_factory=TrainingConfig)
    spo2_calibration: CalibrationConfig = Field(default_factory=CalibrationConfig)
    eval: EvalConfig = Field(default_factory=EvalConfig)
    seed: int = Field(0, ge=0)
    output_dir: str = "runs/latest"

    @field_validator("channels")
    @classmethod
    def validate_channels(cls, v: List[Channel]) -> List[Channel]:
        """Validate that channels are unique ring inputs."""
        if len(set(v)) != len(v):
            raise ValueError("channels must be unique")
        for channel in v:
            if not channel.is_ring_input:
                raise ValueError(f"{channel.value} is reference-only and cannot be selected")
        return v

    @model_validator(mode="after")
    def validate_method_task(self) -> Self:
        """Validate method/task/channel compatibility."""
        if self.method == EstimationMethod.RATIO:
            if self.task != VitalKind.SPO2:
                raise ValueError(f"method 'ratio' estimates spo2 only, not {self.task.value}")
            if Channel.PPG_IR not in self.channels or Channel.PPG_RED not in self.channels:
                raise ValueError("method 'ratio' needs channels ppg_ir and ppg_red")
            if self.preprocess is not None and self.preprocess.steps:
                raise ValueError("method 'ratio' works on raw samples and takes no preprocess steps")
        if self.method in (EstimationMethod.PEAK, EstimationMethod.FFT):
            if not self.task.is_rate:
                raise ValueError(
                    f"method '{self.method.value}' estimates hr or rr only, not {self.task.value}"
                )
            if not any(channel.is_ppg for channel in self.channels):
                raise ValueError(f"method '{self.method.value}' needs a ppg channel")
        if self.preprocess is not None:
            ends_spectral = self.preprocess.spectral is not None
            if self.method == EstimationMethod.PEAK and ends_spectral:
                raise ValueError("method 'peak' needs time-domain samples; remove the spectral step")
            if self.method == EstimationMethod.FFT and not ends_spectral:
                raise ValueError("method 'fft' needs a plan ending with a spectral step")
        return self

    @property
    def primary_ppg(self) -> Optional[Channel]:
        """First selected PPG channel; the input of the physics methods."""
        for channel in self.channels:
            if channel.is_ppg:
                return channel
        return None

    @property
    def fold_seed(self) -> int:
        return self.folds.seed if self.folds.seed is not None else self.seed

    model_config = {"extra": "forbid"}
