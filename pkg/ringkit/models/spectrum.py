"""Power spectrum model."""
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class SpectrumEstimate:
    """One-sided power spectral density and the parameters it was computed with."""

    freqs_hz: np.ndarray
    power: np.ndarray
    segment_s: float
    overlap_fraction: float
    window_fn: str = "hann"
    method: str = "welch"

    def __post_init__(self):
        freqs = np.array(self.freqs_hz, dtype=np.float64)
        power = np.array(self.power, dtype=np.float64)
        if freqs.shape != power.shape:
            raise ValueError("freqs_hz and power must have the same shape")
        if np.any(np.diff(freqs) <= 0):
            raise ValueError("freqs_hz must be strictly increasing")
        if np.any(power < 0):
            raise ValueError("power must be nonnegative")
        freqs.setflags(write=False)
        power.setflags(write=False)
        object.__setattr__(self, "freqs_hz", freqs)
        object.__setattr__(self, "power", power)

    @property
    def resolution_hz(self) -> float:
        """Grid spacing."""
        return float(self.freqs_hz[1] - self.freqs_hz[0])


@dataclass(frozen=True)
class SpectrumPeak:
    """Location and power of a spectral maximum."""

    f_peak: float
    power: float
