"""Windowing, label pairing, reference derivation and subject folds."""
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from sklearn.model_selection import KFold

from ringkit.config import settings
from ringkit.exceptions import DataError, DegenerateSignal, SignalTooShort
from ringkit.models.channel import Channel
from ringkit.models.series import RateBelowGate, SignalWindow
from ringkit.models.session import LabeledPair, SessionRecord
from ringkit.models.vital import VitalKind
from ringkit.schemas.estimators import RateBand
from ringkit.services.estimator_service import detect_peaks
from ringkit.services.preprocess_service import bandpass

logger = logging.getLogger(__name__)

MIN_RR_SEGMENT_S = 10.0


class MissingReference(DataError):
    """Exception raised when a window has no usable reference value."""

    pass


class TooFewSubjects(DataError):
    """Exception raised when there are fewer subjects than folds."""

    pass


@dataclass
class DropLedger:
    """Counts of windows, pairs and labels dropped, by reason."""

    counts: Counter = field(default_factory=Counter)

    def add(self, reason: str, count: int = 1) -> None:
        if count:
            self.counts[reason] += count

    def merge(self, other: "DropLedger") -> "DropLedger":
        self.counts.update(other.counts)
        return self

    def get(self, reason: str) -> int:
        return self.counts.get(reason, 0)

    def as_dict(self) -> Dict[str, int]:
        """Counts sorted by reason."""
        return {reason: int(self.counts[reason]) for reason in sorted(self.counts)}


def window_session(
    session: SessionRecord,
    duration_s: float,
    rate_hz: float,
    stride_s: float,
    gate_hz: Optional[float] = None,
    channels: Optional[Sequence[Channel]] = None,
    ledger: Optional[DropLedger] = None,
) -> List[SignalWindow]:
    """
    Tile a session's activity segments into uniformly resampled windows.

    Windows never cross an activity boundary. Each ring channel is linearly
    interpolated onto the start_ms + i / rate_hz grid. A window whose source
    sample count in [start, end) divided by duration_s falls below the gate
    on any channel is dropped and counted under ``gate``.

    Args:
        session: Source session
        duration_s: Window length
        rate_hz: Output sampling rate
        stride_s: Step between window starts
        gate_hz: Minimum source rate; defaults to settings.RATE_GATE_HZ
        channels: Channels to include; defaults to every ring channel present
        ledger: Drop counter to update

    Returns:
        Windows ordered by start time
    """
    if duration_s <= 0 or stride_s <= 0:
        raise ValueError("duration_s and stride_s must be positive")
    gate_hz = settings.RATE_GATE_HZ if gate_hz is None else gate_hz
    ledger = ledger if ledger is not None else DropLedger()
    selected = list(channels) if channels is not None else list(session.ring_channels)
    series = [session.signal(channel) for channel in selected]
    if not series or any(item is None for item in series):
        return []

    duration_ms = duration_s * 1000.0
    n_samples = int(round(duration_s * rate_hz))
    offsets = np.arange(n_samples) * (1000.0 / rate_hz)
    windows: List[SignalWindow] = []

    for segment in session.activities:
        span_ms = segment.end_ms - segment.start_ms
        if span_ms < duration_ms:
            continue
        count = int(math.floor((span_ms - duration_ms) / (stride_s * 1000.0) + 1e-9)) + 1
        for i in range(count):
            start_ms = segment.start_ms + int(round(i * stride_s * 1000.0))
            end_ms = start_ms + duration_ms
            source_rate = min(
                len(item.between(start_ms, end_ms)[0]) / duration_s for item in series
            )
            grid = start_ms + offsets
            resampled: Dict[Channel, np.ndarray] = {}
            if source_rate > 0:
                for channel, item in zip(selected, series):
                    t, v = item.between(start_ms - 1000.0, end_ms + 1000.0)
                    resampled[channel] = np.interp(grid, t, v)
            try:
                window = SignalWindow(
                    session_id=session.session_id,
                    start_ms=start_ms,
                    duration_s=duration_s,
                    rate_hz=rate_hz,
                    channels=resampled,
                    activity=segment.tag,
                    source_rate_hz=source_rate,
                    gate_hz=gate_hz,
                )
            except RateBelowGate as exc:
                ledger.add("gate")
                logger.debug("%s", exc)
                continue
            windows.append(window)

    ledger.add("windows", len(windows))
    return windows


def derive_rr_reference(resp: np.ndarray, rate_hz: float, band: Optional[RateBand] = None) -> float:
    """
    Respiratory rate of a uniformly sampled respiration waveform.

    The waveform is band-passed to the RR band and its breaths are counted
    with ``detect_peaks``. The rate is taken over whole breathing cycles,
    60 x (peaks - 1) / (t_last - t_first); with fewer than two peaks it
    falls back to 60 x peaks / duration.

    Args:
        resp: Respiration samples
        rate_hz: Sampling rate
        band: RR band; defaults to 6-30 breaths/min with a 0.1-0.5 Hz filter

    Returns:
        Breaths per minute

    Raises:
        SignalTooShort: If shorter than 10 s
        DegenerateSignal: If the waveform is constant
    """
    resp = np.asarray(resp, dtype=np.float64)
    band = band or RateBand.for_kind(VitalKind.RR)
    duration_s = len(resp) / rate_hz
    if duration_s < MIN_RR_SEGMENT_S:
        raise SignalTooShort(f"respiration segment of {duration_s:.1f} s is shorter than {MIN_RR_SEGMENT_S} s")
    if np.ptp(resp) == 0:
        raise DegenerateSignal("respiration waveform is constant")

    filtered = bandpass(resp - np.mean(resp), rate_hz, band.filter)
    peaks = detect_peaks(filtered, rate_hz, band)
    if len(peaks) >= 2:
        return 60.0 * (len(peaks) - 1) / ((peaks[-1] - peaks[0]) / rate_hz)
    return 60.0 * len(peaks) / duration_s


def _mean_label(session: SessionRecord, kind: VitalKind, window: SignalWindow) -> float:
    t_ms, values = session.label_arrays(kind)
    inside = values[(t_ms >= window.start_ms) & (t_ms < window.end_ms)]
    expected = window.duration_s * settings.LABEL_RATE_HZ
    if len(inside) == 0 or len(inside) < settings.MIN_LABEL_COVERAGE * expected:
        raise MissingReference(
            f"{kind.value}: {len(inside)} of {expected:.0f} expected label samples in {window!r}"
        )
    return math.fsum(inside) / len(inside)


def _rr_from_waveform(session: SessionRecord, window: SignalWindow) -> Optional[float]:
    resp = session.signal(Channel.RESP_REF)
    if resp is None:
        return None
    native_rate = resp.effective_rate_hz
    t, v = resp.between(window.start_ms, window.end_ms)
    if native_rate <= 0 or len(t) < settings.MIN_LABEL_COVERAGE * window.duration_s * native_rate:
        raise MissingReference(f"rr: respiration waveform covers {len(t)} samples in {window!r}")
    n = int(round(window.duration_s * native_rate))
    grid = window.start_ms + np.arange(n) * (1000.0 / native_rate)
    margin_t, margin_v = resp.between(window.start_ms - 1000.0, window.end_ms + 1000.0)
    return derive_rr_reference(np.interp(grid, margin_t, margin_v), native_rate)


def _bp_bracket(session: SessionRecord, kind: VitalKind, window: SignalWindow) -> float:
    segment = session.segment_at(window.start_ms, window.end_ms)
    if segment is None:
        raise MissingReference(f"{kind.value}: {window!r} is outside every activity segment")
    t_ms, values = session.label_arrays(kind)
    tolerance_ms = settings.BP_BRACKET_TOLERANCE_S * 1000.0
    brackets: List[float] = []

    before = np.flatnonzero((t_ms <= segment.start_ms) & (t_ms >= segment.start_ms - tolerance_ms))
    if len(before):
        brackets.append(float(values[before[-1]]))
    after = np.flatnonzero((t_ms >= segment.end_ms) & (t_ms <= segment.end_ms + tolerance_ms))
    if len(after):
        brackets.append(float(values[after[0]]))

    if not brackets:
        raise MissingReference(f"{kind.value}: no measurement brackets the {segment.tag.value} segment")
    return math.fsum(brackets) / len(brackets)


def reference_for(window: SignalWindow, session: SessionRecord, kind: VitalKind) -> float:
    """
    Reference value of one vital kind for a window.

    HR and SpO2 average the label samples inside the window; RR comes from
    the respiration waveform, or from rr labels when the session has none;
    SBP and DBP average the measurements bracketing the enclosing activity
    segment.

    Raises:
        MissingReference: If no usable reference exists
        DegenerateSignal: If the respiration waveform is flat
    """
    kind = VitalKind(kind)
    if kind.is_blood_pressure:
        return _bp_bracket(session, kind, window)
    if kind == VitalKind.RR:
        value = _rr_from_waveform(session, window)
        if value is not None:
            return value
    return _mean_label(session, kind, window)


def pair_labels(
    windows: Sequence[SignalWindow],
    session: SessionRecord,
    kind: VitalKind,
    ledger: Optional[DropLedger] = None,
) -> List[LabeledPair]:
    """
    Attach reference values to windows.

    Windows without a usable reference are excluded and counted under
    ``missing_reference``; flat or too-short respiration under
    ``degenerate_reference``; derived values outside the kind's
    plausibility bounds under ``implausible_reference``.

    Args:
        windows: Windows of this session
        session: Session providing labels and reference waveforms
        kind: Vital kind to pair
        ledger: Drop counter to update

    Returns:
        Pairs in window order
    """
    kind = VitalKind(kind)
    ledger = ledger if ledger is not None else DropLedger()
    pairs: List[LabeledPair] = []
    for window in windows:
        if window.session_id != session.session_id:
            raise ValueError(f"{window!r} does not belong to session {session.session_id}")
        try:
            reference = reference_for(window, session, kind)
        except MissingReference as exc:
            ledger.add("missing_reference")
            logger.debug("%s", exc)
            continue
        except (DegenerateSignal, SignalTooShort) as exc:
            ledger.add("degenerate_reference")
            logger.debug("%s: %s", window, exc)
            continue
        if not kind.is_plausible(reference):
            ledger.add("implausible_reference")
            logger.debug("%s reference %.3f implausible for %r", kind.value, reference, window)
            continue
        pairs.append(
            LabeledPair(
                window=window,
                kind=kind,
                reference=reference,
                subject_id=session.subject_id,
                scenario=window.scenario,
                ring_type=session.ring_type,
            )
        )
    ledger.add("pairs", len(pairs))
    return pairs


@dataclass(frozen=True)
class FoldPlan:
    """Subject-disjoint assignment of subjects to k folds."""

    k: int
    assignments: Dict[str, int]

    def subjects_in(self, fold: int) -> FrozenSet[str]:
        """Subjects assigned to a fold."""
        return frozenset(subject for subject, index in self.assignments.items() if index == fold)

    def sizes(self) -> List[int]:
        """Subject count per fold."""
        return [len(self.subjects_in(fold)) for fold in range(self.k)]

    def split(self, fold: int) -> Tuple[FrozenSet[str], FrozenSet[str], FrozenSet[str]]:
        """
        Train, validation and test subjects of one rotation.

        Test is ``fold``, validation is ``fold + 1`` (mod k) and train is the
        rest. With k = 2 the validation set is empty.
        """
        if not 0 <= fold < self.k:
            raise ValueError(f"fold {fold} outside 0..{self.k - 1}")
        test = self.subjects_in(fold)
        validation = self.subjects_in((fold + 1) % self.k) if self.k > 2 else frozenset()
        train = frozenset(self.assignments) - test - validation
        return train, validation, test


def make_folds(subjects: Iterable[str], k: int, seed: int) -> FoldPlan:
    """
    Assign subjects to k folds with shuffled KFold splits.

    Subjects are de-duplicated and sorted before splitting, so the plan
    depends only on the subject set, k and seed. Fold sizes differ by at
    most one. KFold needs at least two splits, and a single fold would
    leave no training subjects, so k = 1 is rejected.

    Raises:
        TooFewSubjects: If k < 2 or k exceeds the subject count
    """
    unique = sorted(set(subjects))
    if k < 2 or k > len(unique):
        raise TooFewSubjects(f"cannot make {k} folds from {len(unique)} subjects")
    # MT19937 seeds through SeedSequence, so 64-bit seeds are accepted
    kfold = KFold(n_splits=k, shuffle=True, random_state=np.random.RandomState(np.random.MT19937(seed)))
    assignments = {}
    for fold, (_, test_index) in enumerate(kfold.split(unique)):
        assignments.update({unique[index]: fold for index in test_index})
    return FoldPlan(k=k, assignments=dict(sorted(assignments.items())))


def summarize_labels(sessions: Sequence[SessionRecord]) -> List[Dict[str, object]]:
    """
    Label statistics per activity and vital kind.

    Returns:
        Rows with activity, kind, count, mean, std, min, max and the
        recorded hours of the activity, sorted by activity then kind
    """
    hours: Dict[str, float] = {}
    values: Dict[Tuple[str, str], List[float]] = {}
    for session in sessions:
        for segment in session.activities:
            tag = segment.tag.value
            hours[tag] = hours.get(tag, 0.0) + segment.duration_s / 3600.0
        for sample in session.labels:
            segment = session.segment_at(sample.t_ms, sample.t_ms)
            if segment is None:
                continue
            values.setdefault((segment.tag.value, sample.kind.value), []).append(sample.value)

    rows: List[Dict[str, object]] = []
    for (tag, kind), items in sorted(values.items()):
        array = np.array(items)
        rows.append(
            {
                "activity": tag,
                "kind": kind,
                "count": len(items),
                "mean": float(np.mean(array)),
                "std": float(np.std(array)),
                "min": float(np.min(array)),
                "max": float(np.max(array)),
                "hours": hours.get(tag, 0.0),
            }
        )
    return rows
