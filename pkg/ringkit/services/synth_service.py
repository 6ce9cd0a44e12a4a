"""Seeded synthetic PPG, accelerometer and respiration sessions with known ground truth."""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Tuple, Union

import numpy as np
from pydantic import ValidationError
from scipy.integrate import cumulative_trapezoid

from ringkit.exceptions import ConfigError
from ringkit.models.activity import ActivityTag
from ringkit.models.channel import Channel
from ringkit.models.series import TimeSeries
from ringkit.models.session import ActivitySegment, LabelSample, SessionRecord
from ringkit.models.vital import VitalKind
from ringkit.schemas.estimators import RateBand, SpO2Calibration
from ringkit.schemas.synth import CohortSpec, MotionKind, MotionSpec, SynthSpec, Trajectory

logger = logging.getLogger(__name__)

SYSTOLIC_PHASE = 0.2
SYSTOLIC_WIDTH = 0.13
NOTCH_DELAY = 0.3
NOTCH_WIDTH = 0.06
BASELINE_WANDER = 0.02
AMPLITUDE_MODULATION = 0.05
DFT_GRID_HZ = 0.001


class SpecInvalid(ConfigError):
    """Exception raised when a synth spec cannot produce a valid session."""

    pass


@dataclass(frozen=True, eq=False)
class SynthSignals:
    """Generated channels, labels and the integrated cardiac cycle count."""

    series: Dict[Channel, TimeSeries]
    labels: List[LabelSample] = field(default_factory=list)
    cardiac_cycles: float = 0.0


def spec_from_payload(payload: dict) -> SynthSpec:
    """
    Validate a synth spec dictionary.

    Raises:
        SpecInvalid: If the payload fails validation
    """
    try:
        return SynthSpec.model_validate(payload)
    except ValidationError as exc:
        raise SpecInvalid(str(exc)) from exc


def trajectory_at(t_s: np.ndarray, knots: Trajectory) -> np.ndarray:
    """Piecewise-linear trajectory, held constant outside its knots."""
    times = np.array([t for t, _ in knots], dtype=np.float64)
    values = np.array([v for _, v in knots], dtype=np.float64)
    return np.interp(t_s, times, values)


def integrate_phase(t_s: np.ndarray, knots: Trajectory) -> np.ndarray:
    """
    Cycles completed since t_s[0] for a per-minute rate trajectory.

    Args:
        t_s: Increasing sample times in seconds
        knots: (seconds, per-minute rate) knots

    Returns:
        Cumulative cycle count at each sample, starting at 0
    """
    return cumulative_trapezoid(trajectory_at(t_s, knots) / 60.0, t_s, initial=0.0)


def _circular_distance(phase: np.ndarray, center: float) -> np.ndarray:
    delta = np.mod(phase - center, 1.0)
    return np.minimum(delta, 1.0 - delta)


def _raw_template(phase: np.ndarray, notch_amp: float) -> np.ndarray:
    systolic = np.exp(-0.5 * (_circular_distance(phase, SYSTOLIC_PHASE) / SYSTOLIC_WIDTH) ** 2)
    notch = notch_amp * np.exp(
        -0.5 * (_circular_distance(phase, SYSTOLIC_PHASE + NOTCH_DELAY) / NOTCH_WIDTH) ** 2
    )
    return systolic + notch


def pulse_waveform(cycles: np.ndarray, notch_amp: float) -> np.ndarray:
    """
    Two-lobe beat template evaluated at a cycle count.

    The template is zero-mean over one cycle with an RMS of 1/sqrt(2), so an
    amplitude A gives the same RMS as a sinusoid of amplitude A.
    """
    reference = _raw_template(np.linspace(0.0, 1.0, 2000, endpoint=False), notch_amp)
    mean, spread = reference.mean(), reference.std()
    return (_raw_template(np.mod(cycles, 1.0), notch_amp) - mean) / spread / math.sqrt(2.0)


def motion_waveform(t_s: np.ndarray, motion: MotionSpec, phase: float) -> np.ndarray:
    """Unit motion pattern: walk adds a second harmonic, squat is a single tone."""
    if motion.kind == MotionKind.NONE:
        return np.zeros_like(t_s)
    f = motion.fundamental_hz
    base = np.sin(2 * np.pi * f * t_s + 2 * np.pi * phase)
    if motion.kind == MotionKind.WALK:
        return base + 0.5 * np.sin(2 * np.pi * 2 * f * t_s + 4 * np.pi * phase)
    return base


def _timestamps(start_ms: int, n: int, rate_hz: float) -> np.ndarray:
    return start_ms + np.round(np.arange(n) * 1000.0 / rate_hz).astype(np.int64)


def _noise_sigma(amplitude: float, snr_db: float) -> float:
    """Noise std giving snr_db against a sinusoid of the given amplitude."""
    return math.sqrt((amplitude**2 / 2.0) / 10.0 ** (snr_db / 10.0))


def synthesize_signals(spec: SynthSpec) -> SynthSignals:
    """
    Generate every channel and label of a spec.

    PPG_IR = DC x (1 + 2% respiratory wander) + AC x (1 + 5% respiratory
    modulation) x pulse, times (1 + depth x motion). PPG_RED is an affine
    image of the IR channel with AC/DC scaled by target_R, which fixes the
    ratio of ratios regardless of waveform shape. Noise is drawn
    independently per channel.

    Args:
        spec: Validated spec

    Returns:
        SynthSignals

    Raises:
        SpecInvalid: If a channel leaves the positive range or a label is implausible
    """
    rng = np.random.default_rng(spec.seed)
    n = int(round(spec.duration_s * spec.rate_hz))
    n_resp = int(round(spec.duration_s * spec.resp_rate_hz))
    if n < 2 or n_resp < 2:
        raise SpecInvalid(f"duration {spec.duration_s} s is too short to sample")

    t_s = np.arange(n) / spec.rate_hz
    t_resp = np.arange(n_resp) / spec.resp_rate_hz
    cardiac_offset, resp_offset, motion_phase = rng.uniform(0.0, 1.0, size=3)

    cycles = integrate_phase(t_s, spec.hr_bpm)
    pulse = pulse_waveform(cycles + cardiac_offset, spec.notch_amp)
    breathing = np.sin(2 * np.pi * (integrate_phase(t_s, spec.rr_bpm) + resp_offset))
    motion = motion_waveform(t_s, spec.motion, motion_phase)

    ac_ir = spec.perfusion * spec.dc_ir
    ir = spec.dc_ir * (1 + BASELINE_WANDER * breathing) + ac_ir * (1 + AMPLITUDE_MODULATION * breathing) * pulse
    ir = ir * (1 + spec.motion.depth * motion)
    red_gain = spec.target_R * spec.dc_red / spec.dc_ir
    red = spec.dc_red + red_gain * (ir - spec.dc_ir)

    resp = np.sin(2 * np.pi * (integrate_phase(t_resp, spec.rr_bpm) + resp_offset))
    if spec.noise_snr_db is not None:
        ir = ir + rng.normal(0.0, _noise_sigma(ac_ir, spec.noise_snr_db), n)
        red = red + rng.normal(0.0, _noise_sigma(red_gain * ac_ir, spec.noise_snr_db), n)
        resp = resp + rng.normal(0.0, _noise_sigma(1.0, spec.noise_snr_db), n_resp)

    if ir.min() <= 0 or red.min() <= 0:
        raise SpecInvalid(f"{spec.session_id}: PPG leaves the positive range; lower perfusion, target_R or depth")

    acc_amplitude = spec.motion.acc_g if spec.motion.kind != MotionKind.NONE else 0.0
    acc = rng.normal(0.0, spec.acc_noise_g, size=(3, n)) if spec.acc_noise_g > 0 else np.zeros((3, n))
    acc_x = acc_amplitude * motion + acc[0]
    acc_y = 0.5 * acc_amplitude * motion + acc[1]
    acc_z = 1.0 + 0.25 * acc_amplitude * motion + acc[2]

    ring_t = _timestamps(spec.start_ms, n, spec.rate_hz)
    resp_t = _timestamps(spec.start_ms, n_resp, spec.resp_rate_hz)
    series = {
        Channel.PPG_IR: TimeSeries(Channel.PPG_IR, ring_t, ir),
        Channel.PPG_RED: TimeSeries(Channel.PPG_RED, ring_t, red),
        Channel.ACC_X: TimeSeries(Channel.ACC_X, ring_t, acc_x),
        Channel.ACC_Y: TimeSeries(Channel.ACC_Y, ring_t, acc_y),
        Channel.ACC_Z: TimeSeries(Channel.ACC_Z, ring_t, acc_z),
        Channel.BVP_REF: TimeSeries(Channel.BVP_REF, ring_t, pulse),
        Channel.RESP_REF: TimeSeries(Channel.RESP_REF, resp_t, resp),
    }
    return SynthSignals(series=series, labels=_labels(spec), cardiac_cycles=float(cycles[-1]))


def _labels(spec: SynthSpec) -> List[LabelSample]:
    seconds = np.arange(int(math.floor(spec.duration_s)), dtype=np.float64)
    label_t = spec.start_ms + (seconds * 1000).astype(np.int64)
    spo2 = spec.resolved_calibration.spo2(spec.target_R)

    labels: List[LabelSample] = []
    for kind, values in (
        (VitalKind.HR, trajectory_at(seconds, spec.hr_bpm)),
        (VitalKind.RR, trajectory_at(seconds, spec.rr_bpm)),
        (VitalKind.SPO2, np.full(len(seconds), spo2)),
    ):
        labels.extend(LabelSample(kind, int(t), float(v)) for t, v in zip(label_t, values))
    for kind, pre, post in (
        (VitalKind.SBP, spec.sbp_pre, spec.sbp_post),
        (VitalKind.DBP, spec.dbp_pre, spec.dbp_post),
    ):
        labels.append(LabelSample(kind, spec.start_ms, pre))
        labels.append(LabelSample(kind, spec.end_ms, post))

    for sample in labels:
        if not sample.kind.is_plausible(sample.value):
            raise SpecInvalid(
                f"{spec.session_id}: {sample.kind.value} label {sample.value:.2f} is outside {sample.kind.bounds}"
            )
    return labels


def generate(spec: SynthSpec) -> SessionRecord:
    """
    Generate one synthetic session.

    Returns:
        SessionRecord with one activity segment spanning the recording

    Raises:
        SpecInvalid: If the spec cannot produce a valid session
    """
    signals = synthesize_signals(spec)
    logger.debug(
        "Generated %s: %.0f s, %.1f cardiac cycles, R=%.3f",
        spec.session_id,
        spec.duration_s,
        signals.cardiac_cycles,
        spec.target_R,
    )
    return SessionRecord(
        session_id=spec.session_id,
        subject_id=spec.subject_id,
        ring_type=spec.ring_type,
        signals=tuple(signals.series.values()),
        activities=(ActivitySegment(spec.activity, spec.start_ms, spec.end_ms),),
        labels=tuple(signals.labels),
    )


def brute_force_dft_argmax(
    x: np.ndarray, rate_hz: float, band: Union[RateBand, Tuple[float, float]], chunk: int = 256
) -> float:
    """
    Frequency of maximum DFT magnitude on a 0.001 Hz grid inside a band.

    Evaluates the direct transform at every grid frequency; O(N x M).

    Args:
        x: Samples
        rate_hz: Sampling rate
        band: RateBand or (low_hz, high_hz)
        chunk: Grid frequencies evaluated per matrix product

    Returns:
        Frequency in Hz
    """
    low, high = (band.min_hz, band.max_hz) if isinstance(band, RateBand) else band
    x = np.asarray(x, dtype=np.float64)
    x = x - x.mean()
    t = np.arange(len(x)) / rate_hz
    grid = np.arange(low, high + DFT_GRID_HZ / 2, DFT_GRID_HZ)
    magnitudes = np.empty(len(grid))
    for start in range(0, len(grid), chunk):
        freqs = grid[start : start + chunk]
        basis = np.exp(-2j * np.pi * np.outer(freqs, t))
        magnitudes[start : start + chunk] = np.abs(basis @ x)
    return float(grid[int(np.argmax(magnitudes))])


_ACTIVITY_EFFECTS = {
    # activity: (hr offset, rr offset, spo2 offset, motion kind, sbp/dbp post offsets)
    ActivityTag.SITTING: (0.0, 0.0, 0.0, MotionKind.NONE, (0.0, 0.0)),
    ActivityTag.TALKING: (3.0, 2.0, 0.0, MotionKind.NONE, (0.0, 0.0)),
    ActivityTag.SHAKING_HEAD: (2.0, 0.0, 0.0, MotionKind.NONE, (0.0, 0.0)),
    ActivityTag.STANDING: (5.0, 0.0, 0.0, MotionKind.NONE, (2.0, 1.0)),
    ActivityTag.LOW_OXYGEN: (4.0, 2.0, -6.0, MotionKind.NONE, (0.0, 0.0)),
    ActivityTag.WALKING: (10.0, 2.0, 0.0, MotionKind.WALK, (5.0, 2.0)),
    ActivityTag.DEEP_SQUAT: (20.0, 4.0, 0.0, MotionKind.SQUAT, (15.0, 5.0)),
    ActivityTag.OTHER: (0.0, 0.0, 0.0, MotionKind.NONE, (0.0, 0.0)),
}


def expand_cohort(cohort: CohortSpec) -> List[SynthSpec]:
    """
    Expand a cohort into one spec per subject, ring type and activity.

    Subject-level HR, RR, SpO2 and blood pressure are drawn from a generator
    seeded with cohort.seed; activities shift them by fixed offsets and
    choose the motion model. The ratio of each session follows from its
    SpO2 through the ring's default calibration.

    Raises:
        SpecInvalid: If an expanded spec is invalid
    """
    rng = np.random.default_rng(cohort.seed)
    specs: List[SynthSpec] = []
    for subject in range(cohort.n_subjects):
        hr = float(rng.uniform(*cohort.hr_range))
        rr = float(rng.uniform(*cohort.rr_range))
        spo2 = float(rng.uniform(*cohort.spo2_range))
        sbp = float(rng.uniform(105.0, 130.0))
        dbp = float(rng.uniform(65.0, 85.0))
        for ring_type in cohort.ring_types:
            calibration = SpO2Calibration.for_ring(ring_type)
            for activity in cohort.activities:
                hr_offset, rr_offset, spo2_offset, motion_kind, (sbp_rise, dbp_rise) = _ACTIVITY_EFFECTS[activity]
                ratio = calibration.ratio_for(spo2 + spo2_offset)
                if ratio <= 0:
                    raise SpecInvalid(f"SpO2 {spo2 + spo2_offset:.1f} needs a nonpositive ratio on {ring_type.value}")
                payload = {
                    "session_id": f"S{subject:02d}_{ring_type.value}_{activity.value}",
                    "subject_id": f"P{subject:02d}",
                    "ring_type": ring_type,
                    "activity": activity,
                    "start_ms": cohort.start_ms,
                    "duration_s": cohort.duration_s,
                    "rate_hz": cohort.rate_hz,
                    "hr_bpm": hr + hr_offset,
                    "rr_bpm": rr + rr_offset,
                    "target_R": ratio,
                    "noise_snr_db": cohort.noise_snr_db,
                    "motion": MotionSpec(kind=motion_kind, depth=cohort.motion_depth),
                    "sbp_pre": sbp,
                    "sbp_post": sbp + sbp_rise,
                    "dbp_pre": dbp,
                    "dbp_post": dbp + dbp_rise,
                    "seed": int(rng.integers(0, 2**31 - 1)),
                }
                specs.append(spec_from_payload(payload))
    return specs
