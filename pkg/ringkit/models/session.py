"""Session recording model."""
import enum
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from ringkit.models.activity import ActivityTag, Scenario
from ringkit.models.channel import Channel
from ringkit.models.series import SignalWindow, TimeSeries
from ringkit.models.vital import VitalKind


class RingType(str, enum.Enum):
    """Enum for the ring's optical path."""

    REFLECTIVE = "reflective"
    TRANSMISSIVE = "transmissive"


@dataclass(frozen=True)
class ActivitySegment:
    """One annotated activity interval [start_ms, end_ms)."""

    tag: ActivityTag
    start_ms: int
    end_ms: int

    def __post_init__(self):
        if self.end_ms <= self.start_ms:
            raise ValueError(
                f"activity {self.tag.value}: end_ms {self.end_ms} must be after start_ms {self.start_ms}"
            )

    @property
    def duration_s(self) -> float:
        return (self.end_ms - self.start_ms) / 1000.0

    def contains(self, start_ms: float, end_ms: float) -> bool:
        """Check if [start_ms, end_ms) lies inside this segment."""
        return self.start_ms <= start_ms and end_ms <= self.end_ms


@dataclass(frozen=True)
class LabelSample:
    """One ground-truth measurement from a reference device."""

    kind: VitalKind
    t_ms: int
    value: float


@dataclass(frozen=True)
class LoadStats:
    """Counts of samples and labels repaired or dropped while loading."""

    dropped_samples: int = 0
    dropped_labels_invalid: int = 0
    dropped_labels_out_of_bounds: int = 0
    dropped_labels_out_of_span: int = 0

    @property
    def dropped_labels(self) -> int:
        return (
            self.dropped_labels_invalid
            + self.dropped_labels_out_of_bounds
            + self.dropped_labels_out_of_span
        )


@dataclass(frozen=True, eq=False)
class SessionRecord:
    """One subject-session: ring signals, activity segments and reference labels."""

    session_id: str
    subject_id: str
    ring_type: RingType
    signals: Tuple[TimeSeries, ...]
    activities: Tuple[ActivitySegment, ...]
    labels: Tuple[LabelSample, ...] = ()
    load_stats: LoadStats = field(default_factory=LoadStats)

    def __post_init__(self):
        object.__setattr__(self, "signals", tuple(sorted(self.signals, key=_channel_order)))
        activities = tuple(sorted(self.activities, key=lambda a: a.start_ms))
        for previous, current in zip(activities, activities[1:]):
            if current.start_ms < previous.end_ms:
                raise ValueError(
                    f"session {self.session_id}: activity {current.tag.value} at {current.start_ms} "
                    f"overlaps {previous.tag.value} ending at {previous.end_ms}"
                )
        object.__setattr__(self, "activities", activities)
        object.__setattr__(self, "labels", tuple(sorted(self.labels, key=lambda s: (s.kind.value, s.t_ms))))

        span_start, span_end = self.span_ms
        for sample in self.labels:
            if not span_start <= sample.t_ms <= span_end:
                raise ValueError(
                    f"session {self.session_id}: {sample.kind.value} label at {sample.t_ms} "
                    f"is outside the session span [{span_start}, {span_end}]"
                )

    @property
    def channels(self) -> Tuple[Channel, ...]:
        """Channels present in the session."""
        return tuple(series.channel for series in self.signals)

    @property
    def ring_channels(self) -> Tuple[Channel, ...]:
        """Ring-input channels present in the session."""
        return tuple(channel for channel in self.channels if channel.is_ring_input)

    @property
    def span_ms(self) -> Tuple[int, int]:
        """Inclusive [first, last] timestamp covered by signals and activities."""
        starts = [series.start_ms for series in self.signals if series.n_samples]
        ends = [series.end_ms for series in self.signals if series.n_samples]
        starts += [segment.start_ms for segment in self.activities]
        ends += [segment.end_ms for segment in self.activities]
        if not starts:
            return (0, 0)
        return (min(starts), max(ends))

    def signal(self, channel: Channel) -> Optional[TimeSeries]:
        """Get the series of a channel, or None if absent."""
        for series in self.signals:
            if series.channel == channel:
                return series
        return None

    def label_arrays(self, kind: VitalKind) -> Tuple[np.ndarray, np.ndarray]:
        """Return (t_ms, value) arrays of one label kind, time-sorted."""
        samples = [sample for sample in self.labels if sample.kind == kind]
        t_ms = np.array([sample.t_ms for sample in samples], dtype=np.int64)
        values = np.array([sample.value for sample in samples], dtype=np.float64)
        return t_ms, values

    def segment_at(self, start_ms: float, end_ms: float) -> Optional[ActivitySegment]:
        """Activity segment fully containing [start_ms, end_ms), if any."""
        for segment in self.activities:
            if segment.contains(start_ms, end_ms):
                return segment
        return None

    def __repr__(self) -> str:
        return (
            f"<SessionRecord(id={self.session_id}, subject={self.subject_id}, "
            f"ring={self.ring_type.value}, channels={[c.value for c in self.channels]})>"
        )


@dataclass(frozen=True, eq=False)
class LabeledPair:
    """A window paired with the reference value of one vital kind."""

    window: SignalWindow
    kind: VitalKind
    reference: float
    subject_id: str
    scenario: Scenario
    ring_type: RingType

    @property
    def activity(self) -> ActivityTag:
        return self.window.activity

    @property
    def session_id(self) -> str:
        return self.window.session_id

    @property
    def start_ms(self) -> int:
        return self.window.start_ms


_CHANNEL_INDEX = {channel: index for index, channel in enumerate(Channel)}


def _channel_order(series: TimeSeries) -> int:
    return _CHANNEL_INDEX[series.channel]
