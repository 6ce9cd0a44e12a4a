"""Pydantic schemas for synthetic session generation."""
import enum
from typing import List, Optional, Tuple

from pydantic import BaseModel, Field, field_validator, model_validator
from typing_extensions import Self

from ringkit.models.activity import ActivityTag
from ringkit.models.session import RingType
from ringkit.schemas.estimators import SpO2Calibration

# Knots of a piecewise-linear trajectory: (seconds from start, per-minute rate)
Trajectory = List[Tuple[float, float]]

HR_RANGE = (30.0, 180.0)
RR_RANGE = (6.0, 30.0)


class MotionKind(str, enum.Enum):
    """Enum for injected motion patterns."""

    NONE = "none"
    WALK = "walk"
    SQUAT = "squat"


class MotionSpec(BaseModel):
    """Motion artifact model."""

    kind: MotionKind = MotionKind.NONE
    freq_hz: Optional[float] = Field(None, gt=0, description="Step or cycle rate; walk 2.0, squat 0.5")
    depth: float = Field(0.03, ge=0, lt=0.5, description="Relative PPG modulation depth")
    acc_g: float = Field(0.3, ge=0, description="ACC motion amplitude in g")

    @property
    def fundamental_hz(self) -> float:
        if self.freq_hz is not None:
            return self.freq_hz
        return 0.5 if self.kind == MotionKind.SQUAT else 2.0

    @property
    def default_activity(self) -> ActivityTag:
        return _MOTION_ACTIVITY[self.kind]

    model_config = {"frozen": True, "extra": "forbid"}


_MOTION_ACTIVITY = {
    MotionKind.NONE: ActivityTag.SITTING,
    MotionKind.WALK: ActivityTag.WALKING,
    MotionKind.SQUAT: ActivityTag.DEEP_SQUAT,
}


def _as_trajectory(value):
    """Accept a constant rate or a knot list."""
    if isinstance(value, (int, float)):
        return [(0.0, float(value))]
    return value


def _check_trajectory(knots: Trajectory, bounds: Tuple[float, float], name: str) -> Trajectory:
    if not knots:
        raise ValueError(f"{name} needs at least one knot")
    times = [t for t, _ in knots]
    if any(later <= earlier for earlier, later in zip(times, times[1:])):
        raise ValueError(f"{name} knot times must be strictly increasing")
    low, high = bounds
    for _, rate in knots:
        if not low <= rate <= high:
            raise ValueError(f"{name} value {rate} outside [{low}, {high}]")
    return knots


class SynthSpec(BaseModel):
    """Parameters of one synthetic session."""

    session_id: str = Field("S00", min_length=1)
    subject_id: str = Field("P00", min_length=1)
    ring_type: RingType = RingType.REFLECTIVE
    activity: Optional[ActivityTag] = None
    start_ms: int = Field(1_700_000_000_000, ge=0)
    duration_s: float = Field(300.0, gt=0)
    rate_hz: float = Field(100.0, gt=0)
    resp_rate_hz: float = Field(50.0, gt=0, description="Native rate of the respiration reference")
    hr_bpm: Trajectory = Field(default_factory=lambda: [(0.0, 75.0)])
    rr_bpm: Trajectory = Field(default_factory=lambda: [(0.0, 15.0)])
    target_R: float = Field(0.8, gt=0)
    dc_ir: float = Field(50000.0, gt=0)
    dc_red: float = Field(40000.0, gt=0)
    perfusion: float = Field(0.02, gt=0, lt=0.5, description="AC/DC of the IR channel")
    notch_amp: float = Field(0.2, ge=0, lt=1)
    noise_snr_db: Optional[float] = Field(None, description="None for noise-free channels")
    motion: MotionSpec = Field(default_factory=MotionSpec)
    acc_noise_g: float = Field(0.01, ge=0)
    sbp_pre: float = 115.0
    sbp_post: float = 118.0
    dbp_pre: float = 75.0
    dbp_post: float = 76.0
    calibration: Optional[SpO2Calibration] = None
    seed: int = Field(0, ge=0)

    @field_validator("hr_bpm", "rr_bpm", mode="before")
    @classmethod
    def coerce_constant(cls, v):
        """Allow a constant rate in place of a knot list."""
        return _as_trajectory(v)

    @field_validator("hr_bpm")
    @classmethod
    def validate_hr(cls, v: Trajectory) -> Trajectory:
        return _check_trajectory(v, HR_RANGE, "hr_bpm")

    @field_validator("rr_bpm")
    @classmethod
    def validate_rr(cls, v: Trajectory) -> Trajectory:
        return _check_trajectory(v, RR_RANGE, "rr_bpm")

    @model_validator(mode="after")
    def validate_activity(self) -> Self:
        """Fill the activity from the motion model when unset."""
        if self.activity is None:
            self.activity = self.motion.default_activity
        return self

    @property
    def resolved_calibration(self) -> SpO2Calibration:
        """Calibration used to emit SpO2 labels."""
        return self.calibration or SpO2Calibration.for_ring(self.ring_type)

    @property
    def end_ms(self) -> int:
        return self.start_ms + int(round(self.duration_s * 1000))

    model_config = {"extra": "forbid"}


class CohortSpec(BaseModel):
    """A seeded synthetic cohort: subjects x activities x ring types."""

    n_subjects: int = Field(34, ge=1, le=999)
    activities: List[ActivityTag] = Field(
        default_factory=lambda: [ActivityTag.SITTING, ActivityTag.WALKING], min_length=1
    )
    ring_types: List[RingType] = Field(default_factory=lambda: [RingType.REFLECTIVE], min_length=1)
    duration_s: float = Field(120.0, gt=0)
    rate_hz: float = Field(100.0, gt=0)
    hr_range: Tuple[float, float] = (60.0, 100.0)
    rr_range: Tuple[float, float] = (10.0, 20.0)
    spo2_range: Tuple[float, float] = (94.0, 98.0)
    noise_snr_db: Optional[float] = 20.0
    motion_depth: float = Field(0.03, ge=0, lt=0.5)
    start_ms: int = Field(1_700_000_000_000, ge=0)
    seed: int = Field(0, ge=0)

    @field_validator("hr_range", "rr_range", "spo2_range")
    @classmethod
    def validate_range(cls, v: Tuple[float, float], info) -> Tuple[float, float]:
        """Validate that ranges are ordered."""
        if v[0] > v[1]:
            raise ValueError(f"{info.field_name} must be (low, high)")
        return v

    @model_validator(mode="after")
    def validate_bounds(self) -> Self:
        """Validate ranges against the generator limits, including activity offsets."""
        if self.hr_range[0] < HR_RANGE[0] or self.hr_range[1] + 20 > HR_RANGE[1]:
            raise ValueError(f"hr_range must lie in [{HR_RANGE[0]}, {HR_RANGE[1] - 20}]")
        if self.rr_range[0] < RR_RANGE[0] or self.rr_range[1] + 4 > RR_RANGE[1]:
            raise ValueError(f"rr_range must lie in [{RR_RANGE[0]}, {RR_RANGE[1] - 4}]")
        if self.spo2_range[0] - 6 < 70 or self.spo2_range[1] >= 99:
            raise ValueError("spo2_range must lie in [76, 99)")
        return self

    model_config = {"extra": "forbid"}
