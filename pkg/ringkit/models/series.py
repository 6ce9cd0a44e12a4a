"""Time series and signal window models."""
from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np

from ringkit.exceptions import DataError
from ringkit.models.activity import ActivityTag, Scenario
from ringkit.models.channel import Channel


class RateBelowGate(DataError):
    """Exception raised when a window's source sampling rate is below the gate."""

    pass


def _frozen(array, dtype) -> np.ndarray:
    """Copy an array-like into a read-only 1-D numpy array."""
    result = np.array(array, dtype=dtype, copy=True)
    if result.ndim != 1:
        raise ValueError(f"expected a 1-D array, got shape {result.shape}")
    result.setflags(write=False)
    return result


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """One recorded channel: millisecond timestamps and raw sample values.

    Construction only checks shapes. Monotonicity and finiteness are reported
    by ``ringkit.utils.validation.validate_series`` so that loaders can count
    and repair violations instead of failing on the first one.
    """

    channel: Channel
    timestamps: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        timestamps = _frozen(self.timestamps, np.int64)
        values = _frozen(self.values, np.float64)
        if len(timestamps) != len(values):
            raise ValueError(
                f"{self.channel.value}: {len(timestamps)} timestamps but {len(values)} values"
            )
        object.__setattr__(self, "timestamps", timestamps)
        object.__setattr__(self, "values", values)

    @property
    def n_samples(self) -> int:
        """Number of samples."""
        return len(self.values)

    @property
    def start_ms(self) -> int:
        """First timestamp."""
        return int(self.timestamps[0])

    @property
    def end_ms(self) -> int:
        """Last timestamp."""
        return int(self.timestamps[-1])

    @property
    def span_s(self) -> float:
        """Duration between first and last sample in seconds."""
        if self.n_samples < 2:
            return 0.0
        return (self.end_ms - self.start_ms) / 1000.0

    @property
    def effective_rate_hz(self) -> float:
        """Average sampling rate over the whole series."""
        if self.span_s <= 0:
            return 0.0
        return (self.n_samples - 1) / self.span_s

    def between(self, start_ms: float, end_ms: float) -> Tuple[np.ndarray, np.ndarray]:
        """Return timestamps and values with start_ms <= t < end_ms."""
        lo = np.searchsorted(self.timestamps, start_ms, side="left")
        hi = np.searchsorted(self.timestamps, end_ms, side="left")
        return self.timestamps[lo:hi], self.values[lo:hi]


@dataclass(frozen=True, eq=False)
class SignalWindow:
    """A fixed-duration, uniformly resampled multi-channel segment.

    The unit every estimator works on. Only ring-input channels are held;
    reference waveforms stay in the session at their native rate.
    """

    session_id: str
    start_ms: int
    duration_s: float
    rate_hz: float
    channels: Dict[Channel, np.ndarray]
    activity: ActivityTag
    source_rate_hz: float
    gate_hz: float = 95.0

    def __post_init__(self):
        if self.source_rate_hz < self.gate_hz:
            raise RateBelowGate(
                f"window {self.session_id}@{self.start_ms}: source rate "
                f"{self.source_rate_hz:.2f} Hz is below the {self.gate_hz:.2f} Hz gate"
            )
        if self.duration_s <= 0 or self.rate_hz <= 0:
            raise ValueError("duration_s and rate_hz must be positive")

        expected = self.n_samples
        frozen: Dict[Channel, np.ndarray] = {}
        for channel, samples in self.channels.items():
            channel = Channel(channel)
            if not channel.is_ring_input:
                raise ValueError(f"{channel.value} is reference-only and cannot enter a window")
            array = _frozen(samples, np.float64)
            if len(array) != expected:
                raise ValueError(
                    f"{channel.value}: expected {expected} samples, got {len(array)}"
                )
            if not np.all(np.isfinite(array)):
                raise ValueError(f"{channel.value}: window contains non-finite samples")
            frozen[channel] = array
        object.__setattr__(self, "channels", frozen)

    @property
    def n_samples(self) -> int:
        """Samples per channel: round(duration_s x rate_hz)."""
        return int(round(self.duration_s * self.rate_hz))

    @property
    def end_ms(self) -> int:
        """Exclusive end timestamp."""
        return self.start_ms + int(round(self.duration_s * 1000))

    @property
    def scenario(self) -> Scenario:
        """Scenario of the window's activity."""
        return self.activity.scenario

    @property
    def window_ref(self) -> Tuple[str, int]:
        """(session id, start_ms) identifying this window."""
        return (self.session_id, self.start_ms)

    def channel(self, channel: Channel) -> np.ndarray:
        """Get the samples of one channel.

        Raises:
            KeyError: If the channel is not present in the window
        """
        try:
            return self.channels[Channel(channel)]
        except KeyError:
            raise KeyError(
                f"channel {Channel(channel).value} not present in window {self.session_id}@{self.start_ms}"
            ) from None

    def has(self, channel: Channel) -> bool:
        """Check if a channel is present."""
        return Channel(channel) in self.channels

    def __repr__(self) -> str:
        return (
            f"<SignalWindow(session={self.session_id}, start_ms={self.start_ms}, "
            f"activity={self.activity.value}, channels={[c.value for c in self.channels]})>"
        )
