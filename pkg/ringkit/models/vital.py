"""Vital sign model."""
import enum
import math
from typing import Tuple


class VitalKind(str, enum.Enum):
    """Enum for estimated vital signs."""

    HR = "hr"
    RR = "rr"
    SPO2 = "spo2"
    SBP = "sbp"
    DBP = "dbp"

    @property
    def unit(self) -> str:
        """Unit the kind is reported in."""
        return _UNITS[self]

    @property
    def bounds(self) -> Tuple[float, float]:
        """Plausibility bounds (inclusive) used for label validation."""
        return PLAUSIBILITY_BOUNDS[self]

    @property
    def is_rate(self) -> bool:
        """Check if kind is a per-minute rate (HR or RR)."""
        return self in (VitalKind.HR, VitalKind.RR)

    @property
    def is_blood_pressure(self) -> bool:
        """Check if kind is a blood pressure component."""
        return self in (VitalKind.SBP, VitalKind.DBP)

    def is_plausible(self, value: float) -> bool:
        """Check if a value is finite and inside the plausibility bounds."""
        low, high = self.bounds
        return math.isfinite(value) and low <= value <= high


_UNITS = {
    VitalKind.HR: "beats/min",
    VitalKind.RR: "breaths/min",
    VitalKind.SPO2: "percent",
    VitalKind.SBP: "mmHg",
    VitalKind.DBP: "mmHg",
}

# Widened beyond the observed cohort ranges so legitimate extremes survive.
PLAUSIBILITY_BOUNDS = {
    VitalKind.HR: (25.0, 220.0),
    VitalKind.RR: (4.0, 40.0),
    VitalKind.SPO2: (70.0, 100.0),
    VitalKind.SBP: (70.0, 200.0),
    VitalKind.DBP: (40.0, 120.0),
}
