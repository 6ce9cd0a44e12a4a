"""Activity and scenario model."""
import enum


class Scenario(str, enum.Enum):
    """Enum for the evaluation scenario an activity belongs to."""

    STATIONARY = "stationary"
    MOTION = "motion"


class ActivityTag(str, enum.Enum):
    """Enum for annotated activities of a recording session."""

    SITTING = "sitting"
    TALKING = "talking"
    SHAKING_HEAD = "shaking_head"
    STANDING = "standing"
    WALKING = "walking"
    LOW_OXYGEN = "low_oxygen"
    DEEP_SQUAT = "deep_squat"
    OTHER = "other"

    @property
    def scenario(self) -> Scenario:
        """Scenario of this activity."""
        return _SCENARIOS[self]


# OTHER counts as motion: an unannotated activity cannot be assumed to be at rest.
_SCENARIOS = {
    ActivityTag.SITTING: Scenario.STATIONARY,
    ActivityTag.TALKING: Scenario.STATIONARY,
    ActivityTag.SHAKING_HEAD: Scenario.STATIONARY,
    ActivityTag.STANDING: Scenario.STATIONARY,
    ActivityTag.LOW_OXYGEN: Scenario.STATIONARY,
    ActivityTag.WALKING: Scenario.MOTION,
    ActivityTag.DEEP_SQUAT: Scenario.MOTION,
    ActivityTag.OTHER: Scenario.MOTION,
}
