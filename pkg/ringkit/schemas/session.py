"""Pydantic schemas for session.json."""
from typing import List

from pydantic import BaseModel, Field, model_validator
from typing_extensions import Self

from ringkit.models.activity import ActivityTag
from ringkit.models.session import ActivitySegment, RingType


class ActivitySpanSchema(BaseModel):
    """Schema for one annotated activity interval."""

    tag: ActivityTag
    start_ms: int
    end_ms: int

    @model_validator(mode="after")
    def validate_interval(self) -> Self:
        """Validate that the interval is nonempty."""
        if self.end_ms <= self.start_ms:
            raise ValueError("end_ms must be after start_ms")
        return self

    def to_segment(self) -> ActivitySegment:
        return ActivitySegment(tag=self.tag, start_ms=self.start_ms, end_ms=self.end_ms)

    model_config = {"extra": "forbid"}


class SessionMeta(BaseModel):
    """Schema for session.json."""

    session_id: str = Field(..., min_length=1, max_length=255)
    subject_id: str = Field(..., min_length=1, max_length=255)
    ring_type: RingType
    activities: List[ActivitySpanSchema] = Field(default_factory=list)

    @model_validator(mode="after")
    def validate_no_overlap(self) -> Self:
        """Validate that activity intervals do not overlap."""
        spans = sorted(self.activities, key=lambda span: span.start_ms)
        for previous, current in zip(spans, spans[1:]):
            if current.start_ms < previous.end_ms:
                raise ValueError(
                    f"activity {current.tag.value} starting at {current.start_ms} overlaps "
                    f"{previous.tag.value} ending at {previous.end_ms}"
                )
        return self

    @classmethod
    def from_record(cls, record) -> "SessionMeta":
        """Create schema from a SessionRecord."""
        return cls(
            session_id=record.session_id,
            subject_id=record.subject_id,
            ring_type=record.ring_type,
            activities=[
                ActivitySpanSchema(tag=segment.tag, start_ms=segment.start_ms, end_ms=segment.end_ms)
                for segment in record.activities
            ],
        )

    model_config = {"extra": "forbid"}
