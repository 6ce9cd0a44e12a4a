"""Tests for the session directory repository."""
import numpy as np
import pytest

from ringkit.models.channel import RING_CHANNELS, Channel
from ringkit.models.session import RingType
from ringkit.models.vital import VitalKind
from ringkit.repositories.session_repository import (
    FormatError,
    SessionRepository,
    SessionValidationError,
    load_session,
    write_session,
)
from ringkit.services.synth_service import generate


def _ppg_rows(n: int = 200, channel: str = "ppg_ir"):
    return [f"{i * 10},{channel},{1000 + i % 7}.5" for i in range(n)]


# ============================================================================
# load_session
# ============================================================================

@pytest.mark.integration
def test_load_written_synth_session(tmp_path, synth_spec):
    """Test that a written synthetic session loads with every ring channel."""
    directory = write_session(generate(synth_spec), tmp_path / "S01")

    session = load_session(directory)

    assert session.session_id == "S01"
    assert session.ring_type == RingType.REFLECTIVE
    assert session.ring_channels == RING_CHANNELS
    assert len(session.ring_channels) == 5
    assert session.signal(Channel.RESP_REF) is not None
    assert session.load_stats.dropped_samples == 0
    assert session.load_stats.dropped_labels == 0


@pytest.mark.unit
def test_load_minimal_session(session_dir_factory):
    """Test a hand-written directory."""
    directory = session_dir_factory(_ppg_rows(), ["0,hr,72.0", "1000,hr,73.0"])

    session = load_session(directory)

    assert session.channels == (Channel.PPG_IR,)
    assert session.signal(Channel.PPG_IR).n_samples == 200
    t_ms, values = session.label_arrays(VitalKind.HR)
    assert t_ms.tolist() == [0, 1000]
    assert values.tolist() == [72.0, 73.0]


@pytest.mark.unit
def test_shuffled_timestamps_cite_first_offending_line(session_dir_factory):
    """Test that a backwards timestamp is a format error at its line."""
    rows = ["0,ppg_ir,1.0", "10,ppg_ir,1.0", "30,ppg_ir,1.0", "20,ppg_ir,1.0", "5,ppg_ir,1.0"]
    directory = session_dir_factory(rows)

    with pytest.raises(FormatError) as exc_info:
        load_session(directory)

    assert exc_info.value.line == 5
    assert exc_info.value.path.endswith("signals.csv")


@pytest.mark.unit
def test_interleaved_channels_are_ordered_per_channel(session_dir_factory):
    """Test that rows of different channels may interleave."""
    rows = []
    for i in range(100):
        rows += [f"{i * 10},ppg_ir,1.0", f"{i * 10},ppg_red,2.0"]

    session = load_session(session_dir_factory(rows))

    assert session.channels == (Channel.PPG_IR, Channel.PPG_RED)


@pytest.mark.unit
def test_implausible_label_is_dropped_and_counted(session_dir_factory):
    """Test that SpO2 = 150 is dropped with a count of one."""
    directory = session_dir_factory(_ppg_rows(), ["0,spo2,97.0", "1000,spo2,150.0"])

    session = load_session(directory)

    assert session.label_arrays(VitalKind.SPO2)[1].tolist() == [97.0]
    assert session.load_stats.dropped_labels_out_of_bounds == 1
    assert session.load_stats.dropped_labels == 1


@pytest.mark.unit
def test_labels_outside_span_and_duplicates_are_dropped(session_dir_factory):
    """Test out-of-span and repeated label timestamps."""
    directory = session_dir_factory(_ppg_rows(), ["0,hr,70.0", "0,hr,71.0", "50000,hr,72.0"])

    session = load_session(directory)

    assert session.load_stats.dropped_labels_invalid == 1
    assert session.load_stats.dropped_labels_out_of_span == 1


@pytest.mark.unit
def test_non_finite_sample_within_tolerance(session_dir_factory):
    """Test that a single NaN is repaired by dropping the sample."""
    rows = _ppg_rows()
    rows[10] = "100,ppg_ir,nan"

    session = load_session(session_dir_factory(rows))

    assert session.signal(Channel.PPG_IR).n_samples == 199
    assert session.load_stats.dropped_samples == 1
    assert np.all(np.isfinite(session.signal(Channel.PPG_IR).values))


@pytest.mark.unit
def test_invalid_samples_beyond_tolerance(session_dir_factory):
    """Test that too many invalid samples fail validation."""
    rows = _ppg_rows()
    for i in range(0, 20, 2):
        rows[i] = f"{i * 10},ppg_ir,inf"

    with pytest.raises(SessionValidationError):
        load_session(session_dir_factory(rows))


@pytest.mark.unit
def test_repeated_timestamp_is_repaired(session_dir_factory):
    """Test that a repeated timestamp is dropped rather than rejected."""
    rows = _ppg_rows()
    rows[5] = "40,ppg_ir,3.0"

    session = load_session(session_dir_factory(rows))

    assert session.load_stats.dropped_samples == 1


@pytest.mark.unit
def test_bad_header(session_dir_factory):
    """Test that the header is checked."""
    with pytest.raises(FormatError) as exc_info:
        load_session(session_dir_factory(_ppg_rows(), signal_header="time,channel,value"))

    assert exc_info.value.line == 1


@pytest.mark.unit
@pytest.mark.parametrize(
    "row,message",
    [
        ("30,ppg_ir,abc", "not a number"),
        ("3x,ppg_ir,1.0", "not an integer"),
        ("30,ppg_green,1.0", "unknown channel"),
    ],
)
def test_malformed_rows_cite_line(session_dir_factory, row, message):
    """Test field-level format errors."""
    rows = _ppg_rows(10)
    rows[3] = row

    with pytest.raises(FormatError, match=message) as exc_info:
        load_session(session_dir_factory(rows))

    assert exc_info.value.line == 5


@pytest.mark.unit
def test_missing_file(session_dir_factory):
    """Test that a missing labels file is a format error."""
    directory = session_dir_factory(_ppg_rows())
    (directory / "labels.csv").unlink()

    with pytest.raises(FormatError, match="file not found"):
        load_session(directory)


@pytest.mark.unit
def test_overlapping_activities_in_meta(session_dir_factory):
    """Test that session.json is validated."""
    meta = {
        "session_id": "S01",
        "subject_id": "P01",
        "ring_type": "reflective",
        "activities": [
            {"tag": "sitting", "start_ms": 0, "end_ms": 1000},
            {"tag": "walking", "start_ms": 500, "end_ms": 1990},
        ],
    }

    with pytest.raises(FormatError, match="overlaps"):
        load_session(session_dir_factory(_ppg_rows(), meta=meta))


# ============================================================================
# write_session / SessionRepository
# ============================================================================

@pytest.mark.integration
def test_write_load_write_is_byte_identical(tmp_path, synth_spec):
    """Test that rewriting a loaded session reproduces the files."""
    first = write_session(generate(synth_spec), tmp_path / "first")
    second = write_session(load_session(first), tmp_path / "second")

    for name in ("signals.csv", "labels.csv", "session.json"):
        assert (first / name).read_bytes() == (second / name).read_bytes()


@pytest.mark.integration
def test_repository_lists_and_loads(tmp_path, synth_spec):
    """Test repository save, listing and loading in name order."""
    repository = SessionRepository(tmp_path)
    for session_id in ("S02", "S01"):
        repository.save(generate(synth_spec.model_copy(update={"session_id": session_id, "duration_s": 10.0})))

    assert [path.name for path in repository.list_session_dirs()] == ["S01", "S02"]
    assert [session.session_id for session in repository.load_all()] == ["S01", "S02"]


@pytest.mark.unit
def test_repository_root_must_exist(tmp_path):
    """Test that a missing dataset root is reported."""
    with pytest.raises(FormatError):
        SessionRepository(tmp_path / "missing").list_session_dirs()
