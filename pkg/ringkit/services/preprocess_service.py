"""Preprocessing primitives and plan execution."""
import logging
from typing import Union

import numpy as np
from scipy import signal

from ringkit.exceptions import ConfigError, DataError, SignalTooShort
from ringkit.models.channel import Channel
from ringkit.models.series import SignalWindow
from ringkit.models.spectrum import SpectrumEstimate
from ringkit.models.vital import VitalKind
from ringkit.schemas.estimators import RateBand
from ringkit.schemas.preprocess import (
    DiffNormStep,
    FilterSpec,
    FilterStep,
    PreprocessPlan,
    SpectralStep,
    StandardizeStep,
)

logger = logging.getLogger(__name__)

# Upper edges closer than this to Nyquist give badly conditioned designs.
NYQUIST_MARGIN = 0.99


class UnstableDesign(ConfigError):
    """Exception raised when a filter cannot be realized at the given sampling rate."""

    pass


class SegmentTooLong(DataError):
    """Exception raised when a spectral segment is longer than the signal."""

    pass


def standardize(x: np.ndarray) -> np.ndarray:
    """
    Zero-mean unit-variance normalization with the population std.

    Constant input maps to all zeros.

    Args:
        x: Samples, at least 2

    Returns:
        Standardized copy of x
    """
    x = np.asarray(x, dtype=np.float64)
    if len(x) < 2:
        raise SignalTooShort(f"standardize needs at least 2 samples, got {len(x)}")
    if np.ptp(x) == 0:
        return np.zeros_like(x)
    centered = x - np.mean(x)
    return centered / np.std(centered)


def check_design(spec: FilterSpec, rate_hz: float) -> None:
    """
    Validate a filter spec against a sampling rate.

    Raises:
        UnstableDesign: If an edge is nonpositive, misordered or too close to Nyquist
    """
    nyquist = rate_hz / 2.0
    if spec.low_hz <= 0 or spec.low_hz >= spec.high_hz:
        raise UnstableDesign(f"passband [{spec.low_hz}, {spec.high_hz}] Hz is empty")
    if spec.high_hz >= NYQUIST_MARGIN * nyquist:
        raise UnstableDesign(
            f"upper edge {spec.high_hz} Hz too close to Nyquist ({nyquist} Hz at {rate_hz} Hz)"
        )


def bandpass(x: np.ndarray, rate_hz: float, spec: FilterSpec) -> np.ndarray:
    """
    Zero-phase Butterworth band-pass (forward-backward second-order sections).

    Args:
        x: Samples
        rate_hz: Sampling rate
        spec: Passband and order

    Returns:
        Filtered samples, same length as x

    Raises:
        UnstableDesign: If spec is invalid for rate_hz
        SignalTooShort: If x has no more than 3 x order samples
    """
    check_design(spec, rate_hz)
    x = np.asarray(x, dtype=np.float64)
    if len(x) <= 3 * spec.order:
        raise SignalTooShort(f"bandpass order {spec.order} needs more than {3 * spec.order} samples")
    sos = signal.butter(spec.order, [spec.low_hz, spec.high_hz], btype="bandpass", fs=rate_hz, output="sos")
    # Pad by one period of the lower edge so slow bands settle before the data starts.
    padlen = min(max(3 * (2 * len(sos) + 1), int(rate_hz / spec.low_hz)), len(x) - 1)
    return signal.sosfiltfilt(sos, x, padlen=padlen)


def diffnorm(x: np.ndarray) -> np.ndarray:
    """First difference followed by standardization; one sample shorter than x."""
    x = np.asarray(x, dtype=np.float64)
    if len(x) < 3:
        raise SignalTooShort(f"diffnorm needs at least 3 samples, got {len(x)}")
    return standardize(np.diff(x))


def welch_psd(
    x: np.ndarray,
    rate_hz: float,
    segment_s: float = 10.0,
    overlap: float = 0.5,
    window: str = "hann",
    method: str = "welch",
) -> SpectrumEstimate:
    """
    One-sided power spectral density.

    ``method="welch"`` averages modified periodograms over overlapping
    segments; ``method="periodogram"`` uses one windowed periodogram of the
    whole signal. Both remove the mean and scale as a density so that
    sum(power) x df approximates the variance.

    Args:
        x: Samples
        rate_hz: Sampling rate
        segment_s: Welch segment length in seconds
        overlap: Fraction of a segment shared with the next
        window: Taper name understood by scipy
        method: "welch" or "periodogram"

    Returns:
        SpectrumEstimate from 0 to rate_hz / 2

    Raises:
        SegmentTooLong: If x is shorter than one segment
    """
    x = np.asarray(x, dtype=np.float64)
    nperseg = int(round(segment_s * rate_hz))
    if method == "periodogram":
        if len(x) < 2:
            raise SignalTooShort("periodogram needs at least 2 samples")
        freqs, power = signal.periodogram(x, fs=rate_hz, window=window, detrend="constant", scaling="density")
    elif method == "welch":
        if nperseg < 2 or len(x) < nperseg:
            raise SegmentTooLong(
                f"{segment_s} s segments need {nperseg} samples, signal has {len(x)}"
            )
        freqs, power = signal.welch(
            x,
            fs=rate_hz,
            window=window,
            nperseg=nperseg,
            noverlap=int(nperseg * overlap),
            detrend="constant",
            scaling="density",
        )
    else:
        raise ValueError(f"unknown spectral method {method!r}")

    return SpectrumEstimate(
        freqs_hz=freqs,
        power=np.maximum(power, 0.0),
        segment_s=segment_s if method == "welch" else len(x) / rate_hz,
        overlap_fraction=overlap if method == "welch" else 0.0,
        window_fn=window,
        method=method,
    )


def apply_steps(x: np.ndarray, rate_hz: float, plan: PreprocessPlan) -> Union[np.ndarray, SpectrumEstimate]:
    """Apply a plan's steps in order to raw samples."""
    result = np.asarray(x, dtype=np.float64)
    for step in plan.steps:
        if isinstance(step, StandardizeStep):
            result = standardize(result)
        elif isinstance(step, FilterStep):
            result = bandpass(result, rate_hz, step)
        elif isinstance(step, DiffNormStep):
            result = diffnorm(result)
        elif isinstance(step, SpectralStep):
            return welch_psd(
                result,
                rate_hz,
                segment_s=step.segment_s,
                overlap=step.overlap,
                window=step.window,
                method=step.method,
            )
    return result


def time_domain(x: np.ndarray, rate_hz: float, plan: PreprocessPlan) -> np.ndarray:
    """Apply only the steps before a plan's spectral step."""
    return apply_steps(x, rate_hz, PreprocessPlan(steps=plan.time_steps))


def run_plan(
    window: SignalWindow, channel: Channel, plan: PreprocessPlan
) -> Union[np.ndarray, SpectrumEstimate]:
    """
    Run a preprocessing plan on one channel of a window.

    Args:
        window: Source window
        channel: Channel to process
        plan: Ordered steps

    Returns:
        SpectrumEstimate if the plan ends with a spectral step, else samples

    Raises:
        KeyError: If the channel is not in the window
    """
    return apply_steps(window.channel(channel), window.rate_hz, plan)


def default_plan(task: VitalKind, method: str) -> PreprocessPlan:
    """
    Default plan of a task/method combination.

    peak: standardize then band-pass; fft: the same followed by a Welch
    spectrum; ridge: standardize; ratio: no steps (raw samples).
    """
    method = str(getattr(method, "value", method))
    if method == "ratio":
        return PreprocessPlan(steps=[])
    if method == "ridge":
        return PreprocessPlan(steps=[StandardizeStep()])
    band = RateBand.for_kind(task).filter
    steps = [StandardizeStep(), FilterStep(low_hz=band.low_hz, high_hz=band.high_hz, order=band.order)]
    if method == "fft":
        steps.append(SpectralStep())
    return PreprocessPlan(steps=steps)
