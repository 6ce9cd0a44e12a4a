"""Estimate model."""
import math
from dataclasses import dataclass, field

from ringkit.models.vital import VitalKind


@dataclass(frozen=True)
class Estimate:
    """A predicted vital-sign value for one window.

    ``out_of_band`` is set when the value lies outside the kind's plausibility
    bounds; the value itself is never clamped.
    """

    kind: VitalKind
    value: float
    session_id: str
    start_ms: int
    method: str
    out_of_band: bool = field(default=False)

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError(f"{self.kind.value} estimate for {self.session_id}@{self.start_ms} is not finite")
        if not self.kind.is_plausible(self.value):
            object.__setattr__(self, "out_of_band", True)

    @property
    def window_ref(self):
        return (self.session_id, self.start_ms)


@dataclass(frozen=True)
class Reading:
    """Raw estimator output before it is bound to a window."""

    value: float
    out_of_band: bool = False
