"""Physics-based vital-sign estimators."""
import logging
import math
from typing import Optional, Tuple

import numpy as np
from scipy import signal

from ringkit.exceptions import DataError, DegenerateSignal
from ringkit.models.channel import Channel
from ringkit.models.estimate import Reading
from ringkit.models.series import SignalWindow
from ringkit.models.spectrum import SpectrumEstimate, SpectrumPeak
from ringkit.models.vital import VitalKind
from ringkit.schemas.estimators import RateBand, SpO2Calibration
from ringkit.schemas.experiment import EstimationMethod
from ringkit.schemas.model import LinearModel
from ringkit.schemas.preprocess import FilterSpec, PreprocessPlan
from ringkit.services.preprocess_service import apply_steps, bandpass

logger = logging.getLogger(__name__)

PROMINENCE_FRACTION = 0.3
CARDIAC_FILTER = FilterSpec(low_hz=0.5, high_hz=3.0, order=4)
SPO2_BAND = (70.0, 100.0)
# AC below this fraction of DC is treated as no pulsatile signal.
MIN_PERFUSION = 1e-9
# Edge zone, as a fraction of the longest in-band period.
EDGE_ZONE_PERIODS = 0.5


class EmptyBand(DataError):
    """Exception raised when a spectrum has no grid points inside the rate band."""

    pass


class NonPositiveDC(DataError):
    """Exception raised when a raw PPG window has a nonpositive mean."""

    pass


class InvalidRatio(DataError):
    """Exception raised when a ratio of ratios is not positive."""

    pass


def _extend_to_edges(peaks: np.ndarray, n: int, rate_hz: float, band: RateBand) -> np.ndarray:
    """
    Replace peaks near the window edges with the interior beat grid.

    Filter transients distort the first and last half of the longest
    in-band period, so peaks there are dropped. A line fitted to the
    interior peak positions is extended backwards and forwards, and every
    grid position in [0, n) is kept.
    """
    zone = EDGE_ZONE_PERIODS * 60.0 / band.min_per_min * rate_hz
    interior = peaks[(peaks >= zone) & (peaks <= n - 1 - zone)]
    if len(interior) < 2:
        return peaks

    ordinals = np.arange(len(interior))
    period, offset = np.polyfit(ordinals, interior.astype(np.float64), 1)
    if period < 1.0:
        return peaks
    last = offset + period * (len(interior) - 1)
    n_before = int(np.floor(offset / period))
    n_after = max(0, int(np.ceil((n - last) / period)) - 1)

    before = offset - period * np.arange(n_before, 0, -1)
    after = last + period * np.arange(1, n_after + 1)
    edges = np.clip(np.round(np.concatenate((before, after))), 0, n - 1).astype(interior.dtype)
    return np.unique(np.concatenate((edges, interior)))


def detect_peaks(x: np.ndarray, rate_hz: float, band: RateBand) -> np.ndarray:
    """
    Locate beats or breaths in a band-passed signal.

    Peaks are local maxima separated by just under the shortest in-band
    period, 60 / band.max_per_min seconds, with prominence of at least
    0.3 x std(x). Filter transients distort extrema near the window edges,
    so peaks within half the longest in-band period of either edge are
    replaced by the beat grid fitted to the interior peaks and extended
    out to the edges.

    Args:
        x: Samples already filtered with band.filter
        rate_hz: Sampling rate
        band: Rate limits

    Returns:
        Strictly increasing peak indices

    Raises:
        DegenerateSignal: If x has zero variance
    """
    x = np.asarray(x, dtype=np.float64)
    spread = float(np.std(x)) if len(x) else 0.0
    if spread == 0.0:
        raise DegenerateSignal("cannot detect peaks in a constant signal")

    # Strictly below the shortest in-band period.
    distance = max(1, math.ceil(60.0 / band.max_per_min * rate_hz) - 1)
    candidates, _ = signal.find_peaks(x, distance=distance)
    if len(candidates) == 0:
        return candidates

    floor = x.min()
    padded = np.concatenate(([floor], x, [floor]))
    prominences, _, _ = signal.peak_prominences(padded, candidates + 1)
    return _extend_to_edges(candidates[prominences >= PROMINENCE_FRACTION * spread], len(x), rate_hz, band)


def rate_from_peaks(
    peaks: np.ndarray, rate_hz: float, duration_s: float, band: Optional[RateBand] = None
) -> Reading:
    """
    Per-minute rate from a peak count: 60 x count / duration_s.

    Args:
        peaks: Peak indices
        rate_hz: Sampling rate of the indices
        duration_s: Window duration
        band: Limits for the out-of-band flag

    Returns:
        Reading flagged out of band when outside band limits
    """
    if duration_s <= 0:
        raise ValueError("duration_s must be positive")
    value = 60.0 * len(peaks) / duration_s
    out_of_band = band is not None and not band.contains(value)
    return Reading(value=value, out_of_band=out_of_band)


def spectrum_peak(spectrum: SpectrumEstimate, band: RateBand) -> SpectrumPeak:
    """
    Interpolated maximum of a spectrum within a rate band.

    The argmax bin is refined by fitting a parabola through it and its two
    neighbors; the offset is limited to half a bin.

    Raises:
        EmptyBand: If no frequency bin lies inside the band
    """
    freqs = spectrum.freqs_hz
    power = spectrum.power
    inside = np.flatnonzero((freqs >= band.min_hz) & (freqs <= band.max_hz))
    if len(inside) == 0:
        raise EmptyBand(
            f"no spectral bins in [{band.min_hz:.3f}, {band.max_hz:.3f}] Hz "
            f"(resolution {spectrum.resolution_hz:.3f} Hz)"
        )

    index = int(inside[np.argmax(power[inside])])
    offset = 0.0
    if 0 < index < len(freqs) - 1:
        alpha, beta, gamma = power[index - 1], power[index], power[index + 1]
        denominator = alpha - 2.0 * beta + gamma
        if denominator != 0:
            offset = float(np.clip(0.5 * (alpha - gamma) / denominator, -0.5, 0.5))
    f_peak = float(freqs[index] + offset * spectrum.resolution_hz)
    return SpectrumPeak(f_peak=f_peak, power=float(power[index]))


def rate_from_spectrum(spectrum: SpectrumEstimate, band: RateBand) -> Reading:
    """Per-minute rate at the interpolated spectral peak within the band."""
    peak = spectrum_peak(spectrum, band)
    value = 60.0 * peak.f_peak
    return Reading(value=value, out_of_band=not band.contains(value))


def ac_dc(x: np.ndarray, rate_hz: float, cardiac_filter: FilterSpec = CARDIAC_FILTER) -> Tuple[float, float]:
    """
    Pulsatile and static components of a raw PPG window.

    dc is the window mean; ac is the RMS of the cardiac-band component
    times sqrt(2), the amplitude of an equivalent sinusoid.

    Args:
        x: Raw, unstandardized samples
        rate_hz: Sampling rate
        cardiac_filter: Band isolating the pulse

    Returns:
        (ac, dc)

    Raises:
        NonPositiveDC: If the mean is not positive
    """
    x = np.asarray(x, dtype=np.float64)
    dc = float(np.mean(x))
    if not dc > 0:
        raise NonPositiveDC(f"dc {dc:.6g} is not positive; contact lost or sensor saturated")
    pulsatile = bandpass(x - dc, rate_hz, cardiac_filter)
    ac = float(np.sqrt(np.mean(pulsatile**2)) * math.sqrt(2.0))
    return ac, dc


def spo2_ratio(
    ir: np.ndarray, red: np.ndarray, rate_hz: float, cardiac_filter: FilterSpec = CARDIAC_FILTER
) -> float:
    """
    Ratio of ratios R = (ac_red / dc_red) / (ac_ir / dc_ir).

    Raises:
        NonPositiveDC: If either channel has a nonpositive mean
        DegenerateSignal: If either channel has no pulsatile component
    """
    if len(ir) != len(red):
        raise ValueError(f"ir has {len(ir)} samples, red has {len(red)}")
    ac_ir, dc_ir = ac_dc(ir, rate_hz, cardiac_filter)
    ac_red, dc_red = ac_dc(red, rate_hz, cardiac_filter)
    if ac_ir < MIN_PERFUSION * dc_ir or ac_red < MIN_PERFUSION * dc_red:
        raise DegenerateSignal("no pulsatile component in ir or red")
    return (ac_red / dc_red) / (ac_ir / dc_ir)


def spo2_estimate(ratio: float, calibration: SpO2Calibration) -> Reading:
    """
    Saturation from a ratio of ratios: a - b x R.

    Raises:
        InvalidRatio: If ratio is not positive
    """
    if not ratio > 0:
        raise InvalidRatio(f"ratio of ratios must be positive, got {ratio}")
    value = calibration.a - calibration.b * ratio
    return Reading(value=value, out_of_band=not SPO2_BAND[0] <= value <= SPO2_BAND[1])


class EstimatorService:
    """Service applying one configured method to windows."""

    def __init__(
        self,
        task: VitalKind,
        method: EstimationMethod,
        channels: Tuple[Channel, ...],
        plan: PreprocessPlan,
        calibration: Optional[SpO2Calibration] = None,
        model: Optional[LinearModel] = None,
        band: Optional[RateBand] = None,
    ):
        """
        Initialize service with the method's parameters.

        Args:
            task: Vital kind to estimate
            method: Estimation method
            channels: Selected ring channels; physics methods use the first PPG channel
            plan: Preprocessing plan
            calibration: SpO2 calibration (ratio method)
            model: Trained model (ridge method)
            band: Rate band; defaults to the task's band
        """
        self.task = VitalKind(task)
        self.method = EstimationMethod(method)
        self.channels = tuple(channels)
        self.plan = plan
        self.calibration = calibration
        self.model = model
        self.band = band if band is not None else (RateBand.for_kind(self.task) if self.task.is_rate else None)
        self.primary = next((channel for channel in self.channels if channel.is_ppg), None)

    def estimate(self, window: SignalWindow) -> Reading:
        """
        Estimate the task's vital sign for one window.

        Raises:
            DataError: Any estimator failure for this window
        """
        if self.method == EstimationMethod.PEAK:
            filtered = apply_steps(window.channel(self.primary), window.rate_hz, self.plan)
            peaks = detect_peaks(filtered, window.rate_hz, self.band)
            return rate_from_peaks(peaks, window.rate_hz, window.duration_s, self.band)

        if self.method == EstimationMethod.FFT:
            spectrum = apply_steps(window.channel(self.primary), window.rate_hz, self.plan)
            return rate_from_spectrum(spectrum, self.band)

        if self.method == EstimationMethod.RATIO:
            if self.calibration is None:
                raise ValueError("ratio method needs a calibration")
            return spo2_estimate(self.ratio(window), self.calibration)

        if self.model is None:
            raise ValueError("ridge method needs a trained model")
        # Deferred: the learner imports this module's ac_dc.
        from ringkit.services.learner_service import featurize, predict

        value = predict(self.model, featurize(window, self.channels, self.plan))
        return Reading(value=value, out_of_band=not self.task.is_plausible(value))

    def ratio(self, window: SignalWindow) -> float:
        """Ratio of ratios of a window's raw IR and RED channels."""
        return spo2_ratio(window.channel(Channel.PPG_IR), window.channel(Channel.PPG_RED), window.rate_hz)
