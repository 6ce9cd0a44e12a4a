"""Session directory repository: session.json, signals.csv, labels.csv."""
import json
import logging
import re
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import ValidationError

from ringkit.config import settings
from ringkit.exceptions import DataError
from ringkit.models.channel import Channel
from ringkit.models.series import TimeSeries
from ringkit.models.session import LabelSample, LoadStats, SessionRecord
from ringkit.models.vital import VitalKind
from ringkit.schemas.session import SessionMeta
from ringkit.utils.validation import ViolationKind, validate_series

logger = logging.getLogger(__name__)

SESSION_FILE = "session.json"
SIGNALS_FILE = "signals.csv"
LABELS_FILE = "labels.csv"
SIGNAL_COLUMNS = ["t_ms", "channel", "value"]
LABEL_COLUMNS = ["t_ms", "kind", "value"]
SIGNAL_FORMAT = "%.6f"
LABEL_FORMAT = "%.4f"
NON_FINITE_TOKENS = {"nan", "inf", "+inf", "-inf", "infinity", "+infinity", "-infinity"}

PathLike = Union[str, Path]


class FormatError(DataError):
    """Exception raised when a session file is malformed."""

    def __init__(self, path: PathLike, line: Optional[int], message: str):
        self.path = str(path)
        self.line = line
        location = f"{self.path}:{line}" if line is not None else self.path
        super().__init__(f"{location}: {message}")


class SessionValidationError(DataError):
    """Exception raised when a session violates invariants beyond the tolerance."""

    pass


def _read_table(path: Path, columns: List[str]) -> pd.DataFrame:
    if not path.is_file():
        raise FormatError(path, None, "file not found")
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, na_filter=False, skip_blank_lines=False)
    except pd.errors.EmptyDataError:
        raise FormatError(path, 1, "empty file, expected a header") from None
    except pd.errors.ParserError as exc:
        match = re.search(r"line (\d+)", str(exc))
        raise FormatError(path, int(match.group(1)) if match else None, str(exc).strip()) from None
    if list(frame.columns) != columns:
        raise FormatError(path, 1, f"header must be {','.join(columns)}, got {','.join(map(str, frame.columns))}")
    return frame


def _first_line(mask: pd.Series) -> Optional[int]:
    """File line of the first True row (header is line 1)."""
    hits = np.flatnonzero(mask.to_numpy())
    return int(hits[0]) + 2 if len(hits) else None


def _parse_columns(
    path: Path, frame: pd.DataFrame, key: str, tokens: List[str]
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Validate and convert t_ms, key and value columns; returns (t, key, value, line)."""
    t_text = frame["t_ms"].astype(str).str.strip()
    line = _first_line(~t_text.str.fullmatch(r"-?\d+").fillna(False).astype(bool))
    if line is not None:
        raise FormatError(path, line, f"t_ms {frame['t_ms'].iloc[line - 2]!r} is not an integer")

    keys = frame[key].astype(str).str.strip()
    line = _first_line(~keys.isin(tokens))
    if line is not None:
        raise FormatError(path, line, f"unknown {key} {frame[key].iloc[line - 2]!r}")

    value_text = frame["value"].astype(str).str.strip()
    values = pd.to_numeric(value_text, errors="coerce")
    line = _first_line(values.isna() & ~value_text.str.lower().isin(NON_FINITE_TOKENS))
    if line is not None:
        raise FormatError(path, line, f"value {frame['value'].iloc[line - 2]!r} is not a number")

    return (
        t_text.astype(np.int64).to_numpy(),
        keys.to_numpy(),
        values.astype(np.float64).to_numpy(),
        np.arange(len(frame)) + 2,
    )


def _check_order(path: Path, groups: Dict[str, Tuple[np.ndarray, np.ndarray, np.ndarray]]) -> None:
    """Raise at the first line whose timestamp goes backwards within its group."""
    offending: List[Tuple[int, str]] = []
    for token, (t, _, lines) in groups.items():
        backwards = np.flatnonzero(np.diff(t) < 0)
        if len(backwards):
            offending.append((int(lines[backwards[0] + 1]), token))
    if offending:
        line, token = min(offending)
        raise FormatError(path, line, f"timestamp goes backwards within {token}")


def _group(t: np.ndarray, keys: np.ndarray, values: np.ndarray, lines: np.ndarray, tokens: List[str]):
    groups = {}
    for token in tokens:
        mask = keys == token
        if mask.any():
            groups[token] = (t[mask], values[mask], lines[mask])
    return groups


def _load_signals(path: Path, tolerance: float) -> Tuple[List[TimeSeries], int]:
    tokens = [channel.value for channel in Channel]
    frame = _read_table(path, SIGNAL_COLUMNS)
    groups = _group(*_parse_columns(path, frame, "channel", tokens), tokens)
    _check_order(path, groups)

    signals: List[TimeSeries] = []
    dropped_total = 0
    for token, (t, values, _) in groups.items():
        raw = TimeSeries(Channel(token), t, values)
        violations = validate_series(raw)
        drop = sorted({v.index for v in violations if v.kind != ViolationKind.LENGTH_MISMATCH})
        if drop:
            fraction = len(drop) / raw.n_samples
            if fraction > tolerance:
                raise SessionValidationError(
                    f"{path}: {len(drop)} of {raw.n_samples} {token} samples invalid "
                    f"({fraction:.2%} > {tolerance:.2%}); first: {violations[0].message}"
                )
            logger.info("%s: dropped %d invalid %s samples", path, len(drop), token)
            keep = np.ones(raw.n_samples, dtype=bool)
            keep[drop] = False
            raw = TimeSeries(raw.channel, t[keep], values[keep])
            dropped_total += len(drop)
        if raw.n_samples:
            signals.append(raw)
    return signals, dropped_total


def _load_labels(path: Path, span: Tuple[int, int]) -> Tuple[List[LabelSample], Dict[str, int]]:
    tokens = [kind.value for kind in VitalKind]
    frame = _read_table(path, LABEL_COLUMNS)
    groups = _group(*_parse_columns(path, frame, "kind", tokens), tokens)
    _check_order(path, groups)

    counts = {"invalid": 0, "out_of_bounds": 0, "out_of_span": 0}
    labels: List[LabelSample] = []
    for token, (t, values, _) in groups.items():
        kind = VitalKind(token)
        previous: Optional[int] = None
        for t_ms, value in zip(t.tolist(), values.tolist()):
            if t_ms == previous or not np.isfinite(value):
                counts["invalid"] += 1
            elif not kind.is_plausible(value):
                counts["out_of_bounds"] += 1
            elif not span[0] <= t_ms <= span[1]:
                counts["out_of_span"] += 1
            else:
                labels.append(LabelSample(kind, t_ms, value))
            previous = t_ms
    if any(counts.values()):
        logger.info("%s: dropped labels %s", path, counts)
    return labels, counts


def _span(signals: List[TimeSeries], meta: SessionMeta) -> Tuple[int, int]:
    starts = [series.start_ms for series in signals] + [span.start_ms for span in meta.activities]
    ends = [series.end_ms for series in signals] + [span.end_ms for span in meta.activities]
    return (min(starts), max(ends)) if starts else (0, 0)


def load_session(directory: PathLike, tolerance: Optional[float] = None) -> SessionRecord:
    """
    Load and validate a session directory.

    Backwards timestamps are format errors. Repeated timestamps and
    non-finite samples are dropped and counted; more than ``tolerance`` of
    any channel fails the load. Labels that are implausible, repeated or
    outside the session span are dropped and counted in ``load_stats``.

    Args:
        directory: Directory holding session.json, signals.csv, labels.csv
        tolerance: Allowed invalid fraction per channel; defaults to settings.VALIDATION_TOLERANCE

    Returns:
        SessionRecord

    Raises:
        FormatError: If a file is missing or malformed
        SessionValidationError: If invalid samples exceed the tolerance
    """
    directory = Path(directory)
    tolerance = settings.VALIDATION_TOLERANCE if tolerance is None else tolerance

    meta_path = directory / SESSION_FILE
    if not meta_path.is_file():
        raise FormatError(meta_path, None, "file not found")
    try:
        meta = SessionMeta.model_validate(json.loads(meta_path.read_text(encoding="utf-8")))
    except json.JSONDecodeError as exc:
        raise FormatError(meta_path, exc.lineno, exc.msg) from None
    except ValidationError as exc:
        raise FormatError(meta_path, None, str(exc)) from None

    signals, dropped_samples = _load_signals(directory / SIGNALS_FILE, tolerance)
    labels, label_counts = _load_labels(directory / LABELS_FILE, _span(signals, meta))

    try:
        return SessionRecord(
            session_id=meta.session_id,
            subject_id=meta.subject_id,
            ring_type=meta.ring_type,
            signals=tuple(signals),
            activities=tuple(span.to_segment() for span in meta.activities),
            labels=tuple(labels),
            load_stats=LoadStats(
                dropped_samples=dropped_samples,
                dropped_labels_invalid=label_counts["invalid"],
                dropped_labels_out_of_bounds=label_counts["out_of_bounds"],
                dropped_labels_out_of_span=label_counts["out_of_span"],
            ),
        )
    except ValueError as exc:
        raise SessionValidationError(f"{directory}: {exc}") from exc


def write_session(record: SessionRecord, directory: PathLike) -> Path:
    """
    Write a session in canonical form.

    Rows are grouped by channel (or kind) in enum order and time-sorted;
    signals use six decimals, labels four, LF line endings.

    Returns:
        The session directory
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    meta = SessionMeta.from_record(record)
    (directory / SESSION_FILE).write_text(
        json.dumps(meta.model_dump(mode="json"), indent=2) + "\n", encoding="utf-8"
    )

    order = {channel: index for index, channel in enumerate(Channel)}
    signal_frames = [
        pd.DataFrame({"t_ms": series.timestamps, "channel": series.channel.value, "value": series.values})
        for series in sorted(record.signals, key=lambda series: order[series.channel])
    ]
    signals = pd.concat(signal_frames, ignore_index=True) if signal_frames else pd.DataFrame(columns=SIGNAL_COLUMNS)
    signals.to_csv(directory / SIGNALS_FILE, index=False, float_format=SIGNAL_FORMAT, lineterminator="\n")

    kinds = {kind: index for index, kind in enumerate(VitalKind)}
    ordered = sorted(record.labels, key=lambda sample: (kinds[sample.kind], sample.t_ms))
    labels = pd.DataFrame(
        {
            "t_ms": np.array([sample.t_ms for sample in ordered], dtype=np.int64),
            "kind": [sample.kind.value for sample in ordered],
            "value": np.array([sample.value for sample in ordered], dtype=np.float64),
        },
        columns=LABEL_COLUMNS,
    )
    labels.to_csv(directory / LABELS_FILE, index=False, float_format=LABEL_FORMAT, lineterminator="\n")
    return directory


class SessionRepository:
    """Repository for session directories under a dataset root."""

    def __init__(self, root: PathLike):
        """Initialize repository with a dataset root."""
        self.root = Path(root)

    def list_session_dirs(self) -> List[Path]:
        """Session directories, sorted by name."""
        if not self.root.is_dir():
            raise FormatError(self.root, None, "dataset root is not a directory")
        return sorted(path for path in self.root.iterdir() if (path / SESSION_FILE).is_file())

    def load(self, directory: PathLike, tolerance: Optional[float] = None) -> SessionRecord:
        """Load one session directory."""
        return load_session(directory, tolerance)

    def load_all(self, tolerance: Optional[float] = None) -> List[SessionRecord]:
        """Load every session under the root, in directory order."""
        return [self.load(directory, tolerance) for directory in self.list_session_dirs()]

    def save(self, record: SessionRecord) -> Path:
        """Write a session to <root>/<session_id>."""
        return write_session(record, self.root / record.session_id)
