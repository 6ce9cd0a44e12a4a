"""Tests for domain models and series validation."""
import math

import numpy as np
import pytest

from ringkit.models import (
    ActivitySegment,
    ActivityTag,
    Channel,
    Estimate,
    FeatureVector,
    LabelSample,
    RateBelowGate,
    RingType,
    Scenario,
    SessionRecord,
    SignalWindow,
    TimeSeries,
    VitalKind,
)
from ringkit.utils.validation import ViolationKind, validate_series


def _window(source_rate_hz: float = 100.0, channels=None, activity=ActivityTag.SITTING) -> SignalWindow:
    return SignalWindow(
        session_id="S01",
        start_ms=0,
        duration_s=2.0,
        rate_hz=100.0,
        channels=channels if channels is not None else {Channel.PPG_IR: np.ones(200)},
        activity=activity,
        source_rate_hz=source_rate_hz,
    )


# ============================================================================
# validate_series
# ============================================================================

@pytest.mark.unit
def test_valid_series_has_no_violations():
    """Test that a monotone finite series passes."""
    series = TimeSeries(Channel.PPG_IR, [0, 10, 20], [1.0, 2.0, 3.0])

    assert validate_series(series) == []


@pytest.mark.unit
def test_repeated_timestamp_reported_at_its_index():
    """Test that a repeated timestamp is reported where it occurs."""
    series = TimeSeries(Channel.PPG_IR, [0, 10, 10], [1.0, 2.0, 3.0])

    violations = validate_series(series)

    assert len(violations) == 1
    assert violations[0].kind == ViolationKind.NON_MONOTONE
    assert violations[0].index == 2


@pytest.mark.unit
def test_nan_value_reported_at_its_index():
    """Test that a NaN is reported as non-finite at its index."""
    values = np.arange(8, dtype=float)
    values[5] = np.nan
    series = TimeSeries(Channel.PPG_RED, np.arange(8) * 10, values)

    violations = validate_series(series)

    assert [(v.kind, v.index) for v in violations] == [(ViolationKind.NON_FINITE, 5)]


@pytest.mark.unit
def test_time_series_rejects_length_mismatch():
    """Test that timestamps and values must have equal length."""
    with pytest.raises(ValueError):
        TimeSeries(Channel.ACC_X, [0, 10], [1.0])


@pytest.mark.unit
def test_time_series_rate_and_span():
    """Test derived span and effective rate."""
    series = TimeSeries(Channel.PPG_IR, np.arange(101) * 10, np.zeros(101))

    assert series.span_s == 1.0
    assert series.effective_rate_hz == pytest.approx(100.0)
    t, _ = series.between(100, 200)
    assert t.tolist() == list(range(100, 200, 10))


@pytest.mark.unit
def test_time_series_arrays_are_read_only():
    """Test that series arrays cannot be mutated."""
    series = TimeSeries(Channel.PPG_IR, [0, 10], [1.0, 2.0])

    with pytest.raises(ValueError):
        series.values[0] = 5.0


# ============================================================================
# SignalWindow
# ============================================================================

@pytest.mark.unit
def test_window_below_rate_gate_cannot_be_built():
    """Test that the constructor enforces the source rate gate."""
    with pytest.raises(RateBelowGate):
        _window(source_rate_hz=90.0)


@pytest.mark.unit
def test_window_rejects_reference_channel():
    """Test that reference waveforms cannot enter a window."""
    with pytest.raises(ValueError, match="reference-only"):
        _window(channels={Channel.BVP_REF: np.ones(200)})


@pytest.mark.unit
def test_window_rejects_wrong_length_and_non_finite():
    """Test sample count and finiteness checks."""
    with pytest.raises(ValueError, match="expected 200"):
        _window(channels={Channel.PPG_IR: np.ones(199)})
    samples = np.ones(200)
    samples[3] = np.inf
    with pytest.raises(ValueError, match="non-finite"):
        _window(channels={Channel.PPG_IR: samples})


@pytest.mark.unit
def test_window_properties():
    """Test window geometry and channel access."""
    window = _window(activity=ActivityTag.WALKING)

    assert window.n_samples == 200
    assert window.end_ms == 2000
    assert window.scenario == Scenario.MOTION
    assert window.window_ref == ("S01", 0)
    assert window.has(Channel.PPG_IR)
    assert not window.has(Channel.PPG_RED)
    with pytest.raises(KeyError):
        window.channel(Channel.PPG_RED)


# ============================================================================
# Activities, vitals and estimates
# ============================================================================

@pytest.mark.unit
@pytest.mark.parametrize(
    "tag,scenario",
    [
        (ActivityTag.SITTING, Scenario.STATIONARY),
        (ActivityTag.TALKING, Scenario.STATIONARY),
        (ActivityTag.SHAKING_HEAD, Scenario.STATIONARY),
        (ActivityTag.STANDING, Scenario.STATIONARY),
        (ActivityTag.LOW_OXYGEN, Scenario.STATIONARY),
        (ActivityTag.WALKING, Scenario.MOTION),
        (ActivityTag.DEEP_SQUAT, Scenario.MOTION),
    ],
)
def test_activity_scenarios(tag, scenario):
    """Test the stationary/motion partition of activities."""
    assert tag.scenario == scenario


@pytest.mark.unit
def test_vital_plausibility_bounds():
    """Test plausibility bounds and rate classification."""
    assert VitalKind.SPO2.is_plausible(97.0)
    assert not VitalKind.SPO2.is_plausible(150.0)
    assert not VitalKind.HR.is_plausible(math.nan)
    assert VitalKind.RR.is_rate
    assert VitalKind.SBP.is_blood_pressure
    assert not VitalKind.SPO2.is_rate


@pytest.mark.unit
def test_estimate_flags_out_of_band_without_clamping():
    """Test that implausible estimates keep their value and get flagged."""
    estimate = Estimate(kind=VitalKind.HR, value=250.0, session_id="S01", start_ms=0, method="fft")

    assert estimate.value == 250.0
    assert estimate.out_of_band is True
    assert estimate.window_ref == ("S01", 0)


@pytest.mark.unit
def test_estimate_rejects_non_finite():
    """Test that estimates must be finite."""
    with pytest.raises(ValueError):
        Estimate(kind=VitalKind.HR, value=math.inf, session_id="S01", start_ms=0, method="peak")


@pytest.mark.unit
def test_feature_vector_validates_schema():
    """Test feature vector length and finiteness checks."""
    vector = FeatureVector(values=[1.0, 2.0], names=("a", "b"))
    assert len(vector) == 2
    assert vector.schema_hash == FeatureVector(values=[3.0, 4.0], names=("a", "b")).schema_hash

    with pytest.raises(ValueError):
        FeatureVector(values=[1.0], names=("a", "b"))
    with pytest.raises(ValueError, match="b"):
        FeatureVector(values=[1.0, math.nan], names=("a", "b"))


# ============================================================================
# SessionRecord
# ============================================================================

@pytest.mark.unit
def test_session_rejects_overlapping_activities():
    """Test that activity segments may not overlap."""
    series = TimeSeries(Channel.PPG_IR, np.arange(100) * 10, np.ones(100))
    with pytest.raises(ValueError, match="overlaps"):
        SessionRecord(
            session_id="S01",
            subject_id="P01",
            ring_type=RingType.REFLECTIVE,
            signals=(series,),
            activities=(
                ActivitySegment(ActivityTag.SITTING, 0, 600),
                ActivitySegment(ActivityTag.WALKING, 500, 990),
            ),
        )


@pytest.mark.unit
def test_session_rejects_label_outside_span():
    """Test that labels must fall inside the session span."""
    series = TimeSeries(Channel.PPG_IR, np.arange(100) * 10, np.ones(100))
    with pytest.raises(ValueError, match="outside the session span"):
        SessionRecord(
            session_id="S01",
            subject_id="P01",
            ring_type=RingType.REFLECTIVE,
            signals=(series,),
            activities=(ActivitySegment(ActivityTag.SITTING, 0, 990),),
            labels=(LabelSample(VitalKind.HR, 5000, 70.0),),
        )


@pytest.mark.unit
def test_session_orders_signals_and_finds_segments(session_factory):
    """Test canonical channel order and segment lookup."""
    session = session_factory(duration_s=10.0, channels=(Channel.ACC_X, Channel.PPG_IR))

    assert session.channels == (Channel.PPG_IR, Channel.ACC_X)
    assert session.signal(Channel.PPG_RED) is None
    assert session.segment_at(0, 10000).tag == ActivityTag.SITTING
    assert session.segment_at(5000, 11000) is None
