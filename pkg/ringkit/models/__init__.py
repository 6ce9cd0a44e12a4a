"""Domain value types shared by every module."""
from ringkit.models.activity import ActivityTag, Scenario
from ringkit.models.channel import ACC_CHANNELS, PPG_CHANNELS, RING_CHANNELS, Channel
from ringkit.models.estimate import Estimate, Reading
from ringkit.models.feature import FeatureVector
from ringkit.models.series import RateBelowGate, SignalWindow, TimeSeries
from ringkit.models.session import (
    ActivitySegment,
    LabeledPair,
    LabelSample,
    LoadStats,
    RingType,
    SessionRecord,
)
from ringkit.models.spectrum import SpectrumEstimate, SpectrumPeak
from ringkit.models.vital import PLAUSIBILITY_BOUNDS, VitalKind

__all__ = [
    "ActivityTag",
    "Scenario",
    "Channel",
    "RING_CHANNELS",
    "PPG_CHANNELS",
    "ACC_CHANNELS",
    "Estimate",
    "Reading",
    "FeatureVector",
    "RateBelowGate",
    "SignalWindow",
    "TimeSeries",
    "ActivitySegment",
    "LabeledPair",
    "LabelSample",
    "LoadStats",
    "RingType",
    "SessionRecord",
    "SpectrumEstimate",
    "SpectrumPeak",
    "PLAUSIBILITY_BOUNDS",
    "VitalKind",
]
