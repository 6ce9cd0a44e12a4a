"""Pytest configuration and fixtures for testing."""
import json
from pathlib import Path
from typing import Callable, Dict, Iterable, Optional, Sequence, Tuple

import numpy as np
import pytest

from ringkit.config import settings
from ringkit.models.activity import ActivityTag
from ringkit.models.channel import RING_CHANNELS, Channel
from ringkit.models.series import TimeSeries
from ringkit.models.session import ActivitySegment, LabelSample, RingType, SessionRecord
from ringkit.models.vital import VitalKind
from ringkit.schemas.synth import SynthSpec

START_MS = 1_700_000_000_000


# ============================================================================
# Settings and RNG Fixtures
# ============================================================================

@pytest.fixture
def test_settings():
    """Return the global settings instance."""
    return settings


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator for test data."""
    return np.random.default_rng(1234)


# ============================================================================
# Session Fixtures
# ============================================================================

def tone(t_s: np.ndarray, freq_hz: float, amplitude: float = 1.0, phase: float = 0.0) -> np.ndarray:
    """Sinusoid helper shared by tests."""
    return amplitude * np.sin(2 * np.pi * freq_hz * t_s + phase)


@pytest.fixture
def session_factory() -> Callable[..., SessionRecord]:
    """Build hand-made sessions with a 1.2 Hz PPG tone on every ring channel."""

    def build(
        duration_s: float = 300.0,
        rate_hz: float = 100.0,
        activity: ActivityTag = ActivityTag.SITTING,
        labels: Iterable[Tuple[VitalKind, int, float]] = (),
        channels: Sequence[Channel] = RING_CHANNELS,
        start_ms: int = 0,
        session_id: str = "S01",
        subject_id: str = "P01",
        ring_type: RingType = RingType.REFLECTIVE,
        extra: Optional[Dict[Channel, Tuple[np.ndarray, np.ndarray]]] = None,
    ) -> SessionRecord:
        n = int(round(duration_s * rate_hz))
        t_ms = start_ms + np.round(np.arange(n) * 1000.0 / rate_hz).astype(np.int64)
        t_s = (t_ms - start_ms) / 1000.0
        signals = []
        for channel in channels:
            if channel.is_ppg:
                values = 1000.0 + tone(t_s, 1.2, 10.0)
            elif channel == Channel.ACC_Z:
                values = np.ones(n)
            else:
                values = np.zeros(n)
            signals.append(TimeSeries(channel, t_ms, values))
        for channel, (t, v) in (extra or {}).items():
            signals.append(TimeSeries(channel, t, v))
        return SessionRecord(
            session_id=session_id,
            subject_id=subject_id,
            ring_type=ring_type,
            signals=tuple(signals),
            activities=(ActivitySegment(activity, start_ms, start_ms + int(round(duration_s * 1000))),),
            labels=tuple(LabelSample(kind, int(t), float(value)) for kind, t, value in labels),
        )

    return build


@pytest.fixture
def synth_spec() -> SynthSpec:
    """A short clean synthetic session spec at 75 BPM and 15 breaths/min."""
    return SynthSpec(
        session_id="S01",
        subject_id="P01",
        start_ms=START_MS,
        duration_s=60.0,
        hr_bpm=75.0,
        rr_bpm=15.0,
        seed=7,
    )


# ============================================================================
# Session Directory Fixtures
# ============================================================================

@pytest.fixture
def session_dir_factory(tmp_path: Path) -> Callable[..., Path]:
    """Write raw session files for repository tests."""

    def write(
        signal_rows: Sequence[str],
        label_rows: Sequence[str] = (),
        meta: Optional[dict] = None,
        name: str = "S01",
        signal_header: str = "t_ms,channel,value",
        label_header: str = "t_ms,kind,value",
    ) -> Path:
        directory = tmp_path / name
        directory.mkdir(parents=True, exist_ok=True)
        meta = meta or {
            "session_id": name,
            "subject_id": "P01",
            "ring_type": "reflective",
            "activities": [{"tag": "sitting", "start_ms": 0, "end_ms": 10000}],
        }
        (directory / "session.json").write_text(json.dumps(meta), encoding="utf-8")
        (directory / "signals.csv").write_text("\n".join([signal_header, *signal_rows]) + "\n", encoding="utf-8")
        (directory / "labels.csv").write_text("\n".join([label_header, *label_rows]) + "\n", encoding="utf-8")
        return directory

    return write


@pytest.fixture
def experiment_payload() -> Callable[..., dict]:
    """Experiment config payload over a small seeded cohort."""

    def build(method: str = "fft", task: str = "hr", channels=("ppg_ir",), **overrides) -> dict:
        payload = {
            "schema_version": 1,
            "dataset": {
                "cohort": {
                    "n_subjects": 6,
                    "activities": ["sitting", "walking"],
                    "duration_s": 60,
                    "noise_snr_db": 20,
                    "seed": 3,
                }
            },
            "task": task,
            "method": method,
            "channels": list(channels),
            "folds": {"k": 3},
            "seed": 11,
        }
        payload.update(overrides)
        return payload

    return build
