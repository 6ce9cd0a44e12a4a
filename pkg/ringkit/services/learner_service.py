"""Spectral ridge-regression baseline and SpO2 calibration fitting."""
import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError

from ringkit.config import settings
from ringkit.exceptions import DataError
from ringkit.models.channel import Channel
from ringkit.models.feature import FeatureVector
from ringkit.models.series import SignalWindow
from ringkit.models.session import LabeledPair
from ringkit.models.vital import VitalKind
from ringkit.schemas.estimators import SpO2Calibration
from ringkit.schemas.model import LinearModel
from ringkit.schemas.preprocess import PreprocessPlan, SpectralStep
from ringkit.services.estimator_service import ac_dc
from ringkit.services.preprocess_service import time_domain, welch_psd
from ringkit.utils.hashing import sha256_names

logger = logging.getLogger(__name__)

BIN_EDGES_HZ = np.linspace(0.1, 5.0, 21)
ACC_ENERGY_BAND_HZ = (0.5, 5.0)
LOG_EPS = 1e-12


class SingularSystem(DataError):
    """Exception raised when the normal equations cannot be solved."""

    pass


class DegenerateFit(DataError):
    """Exception raised when calibration data cannot determine a line."""

    pass


class SchemaMismatch(DataError):
    """Exception raised when features do not match a model's schema."""

    pass


class InsufficientData(DataError):
    """Exception raised when a training split has fewer than two pairs."""

    pass


def feature_names(channels: Sequence[Channel]) -> List[str]:
    """Ordered feature names for a channel selection."""
    names: List[str] = []
    for channel in channels:
        for low, high in zip(BIN_EDGES_HZ[:-1], BIN_EDGES_HZ[1:]):
            names.append(f"{channel.value}_logpow_{low:.3f}_{high:.3f}")
        if channel.is_ppg:
            names.append(f"{channel.value}_acdc")
    if any(channel.is_acc for channel in channels):
        names.append("acc_energy_0.5_5")
    return names


def _band_power(freqs: np.ndarray, power: np.ndarray, low: float, high: float, last: bool) -> float:
    mask = (freqs >= low) & ((freqs <= high) if last else (freqs < high))
    df = freqs[1] - freqs[0]
    return float(np.sum(power[mask]) * df)


def featurize(window: SignalWindow, channels: Sequence[Channel], plan: PreprocessPlan) -> FeatureVector:
    """
    Spectral feature vector of a window.

    Per selected channel: log band power in 20 uniform bins over 0.1-5 Hz of
    the plan's time-domain output, with Welch parameters from the plan's
    spectral step when present. Each PPG channel adds its raw AC/DC ratio;
    any ACC selection adds the log total ACC energy over 0.5-5 Hz.

    Args:
        window: Source window
        channels: Selected channels, in schema order
        plan: Preprocessing plan

    Returns:
        FeatureVector

    Raises:
        KeyError: If a channel is missing from the window
    """
    spectral = plan.spectral or SpectralStep()
    values: List[float] = []
    acc_energy = 0.0

    for channel in channels:
        samples = time_domain(window.channel(channel), window.rate_hz, plan)
        spectrum = welch_psd(
            samples,
            window.rate_hz,
            segment_s=spectral.segment_s,
            overlap=spectral.overlap,
            window=spectral.window,
            method=spectral.method,
        )
        last_bin = len(BIN_EDGES_HZ) - 2
        for i, (low, high) in enumerate(zip(BIN_EDGES_HZ[:-1], BIN_EDGES_HZ[1:])):
            band_power = _band_power(spectrum.freqs_hz, spectrum.power, low, high, i == last_bin)
            values.append(float(np.log(band_power + LOG_EPS)))
        if channel.is_ppg:
            ac, dc = ac_dc(window.channel(channel), window.rate_hz)
            values.append(ac / dc)
        if channel.is_acc:
            raw = welch_psd(window.channel(channel), window.rate_hz, segment_s=spectral.segment_s)
            acc_energy += _band_power(raw.freqs_hz, raw.power, *ACC_ENERGY_BAND_HZ, last=True)

    if any(channel.is_acc for channel in channels):
        values.append(float(np.log(acc_energy + LOG_EPS)))
    return FeatureVector(values=np.array(values), names=tuple(feature_names(channels)))


def fit_ridge(x: np.ndarray, y: np.ndarray, ridge_lambda: float) -> Tuple[np.ndarray, float, np.ndarray, np.ndarray]:
    """
    Closed-form ridge regression on column-standardized features.

    Minimizes sum((y - y_hat)^2) + lambda * ||w||^2 with the intercept left
    unpenalized. Constant columns get unit scale and therefore zero weight.

    Args:
        x: Feature matrix, one row per sample
        y: Targets
        ridge_lambda: Penalty, >= 0

    Returns:
        (weights, intercept, feature_mean, feature_scale)

    Raises:
        SingularSystem: If lambda is 0 and the standardized design is rank deficient
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    mean = x.mean(axis=0)
    scale = x.std(axis=0)
    scale[scale == 0] = 1.0
    standardized = (x - mean) / scale
    y_mean = float(np.mean(y))

    gram = standardized.T @ standardized + ridge_lambda * np.eye(x.shape[1])
    if ridge_lambda == 0 and np.linalg.matrix_rank(gram) < x.shape[1]:
        raise SingularSystem(f"rank-deficient design with {x.shape[0]} rows and {x.shape[1]} features at lambda 0")
    try:
        weights = np.linalg.solve(gram, standardized.T @ (y - y_mean))
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from exc
    return weights, y_mean, mean, scale


def _design(
    pairs: Sequence[LabeledPair], channels: Sequence[Channel], plan: PreprocessPlan
) -> Tuple[np.ndarray, np.ndarray, Tuple[str, ...]]:
    vectors = [featurize(pair.window, channels, plan) for pair in pairs]
    names = vectors[0].names if vectors else tuple(feature_names(channels))
    x = np.vstack([vector.values for vector in vectors]) if vectors else np.empty((0, len(names)))
    y = np.array([pair.reference for pair in pairs], dtype=np.float64)
    return x, y, names


def train_arrays(
    x: np.ndarray,
    y: np.ndarray,
    names: Sequence[str],
    target: VitalKind,
    ridge_lambda: float,
    metadata: Optional[Dict[str, str]] = None,
) -> LinearModel:
    """Fit a LinearModel from a feature matrix."""
    if len(y) < 2:
        raise InsufficientData(f"training needs at least 2 pairs, got {len(y)}")
    weights, intercept, mean, scale = fit_ridge(x, y, ridge_lambda)
    return LinearModel(
        target=target,
        feature_names=list(names),
        schema_hash=sha256_names(names),
        weights=weights.tolist(),
        intercept=intercept,
        feature_mean=mean.tolist(),
        feature_scale=scale.tolist(),
        ridge_lambda=ridge_lambda,
        n_train=len(y),
        metadata=dict(metadata or {}),
    )


def train(
    pairs: Sequence[LabeledPair], ridge_lambda: float, channels: Sequence[Channel], plan: PreprocessPlan
) -> LinearModel:
    """
    Train a ridge model on labeled pairs.

    Args:
        pairs: Training pairs only, all of one vital kind
        ridge_lambda: Penalty
        channels: Feature channels
        plan: Preprocessing plan

    Returns:
        Trained LinearModel

    Raises:
        InsufficientData: If fewer than 2 pairs
        SingularSystem: If lambda is 0 and the system is singular
    """
    if len(pairs) < 2:
        raise InsufficientData(f"training needs at least 2 pairs, got {len(pairs)}")
    x, y, names = _design(pairs, channels, plan)
    return train_arrays(x, y, names, pairs[0].kind, ridge_lambda)


def predict(model: LinearModel, features: FeatureVector) -> float:
    """
    Predict a target from a feature vector.

    Raises:
        SchemaMismatch: If the vector's schema differs from the model's
    """
    if features.schema_hash != model.schema_hash:
        raise SchemaMismatch(
            f"feature schema {features.schema_hash[:12]} does not match model schema {model.schema_hash[:12]}"
        )
    return model.predict_array(features.values)


def select_and_train(
    train_pairs: Sequence[LabeledPair],
    validation_pairs: Sequence[LabeledPair],
    lambda_grid: Sequence[float],
    channels: Sequence[Channel],
    plan: PreprocessPlan,
) -> Tuple[LinearModel, Dict[float, float]]:
    """
    Train one model per penalty and keep the best on validation MAE.

    Only the training split is fitted; validation pairs are used for
    selection only. Ties go to the larger penalty. Without validation pairs
    the default penalty is used.

    Returns:
        (model, validation MAE per penalty)
    """
    if len(train_pairs) < 2:
        raise InsufficientData(f"training needs at least 2 pairs, got {len(train_pairs)}")
    x, y, names = _design(train_pairs, channels, plan)
    target = train_pairs[0].kind

    if not validation_pairs:
        ridge_lambda = settings.DEFAULT_RIDGE_LAMBDA
        logger.debug("No validation pairs; training with default lambda %s", ridge_lambda)
        model = train_arrays(x, y, names, target, ridge_lambda, {"selection": "default"})
        return model, {}

    x_val, y_val, _ = _design(validation_pairs, channels, plan)
    scores: Dict[float, float] = {}
    best: Optional[LinearModel] = None
    best_score = float("inf")
    for ridge_lambda in sorted(lambda_grid):
        try:
            candidate = train_arrays(x, y, names, target, ridge_lambda)
        except SingularSystem:
            logger.info("Skipping lambda %s: singular system", ridge_lambda)
            continue
        predictions = np.array([candidate.predict_array(row) for row in x_val])
        score = float(np.mean(np.abs(predictions - y_val)))
        scores[ridge_lambda] = score
        if score <= best_score:
            best, best_score = candidate, score

    if best is None:
        raise SingularSystem("no penalty in the grid produced a solvable system")
    model = best.model_copy(
        update={"metadata": {"selection": "validation_mae", "validation_mae": repr(best_score)}}
    )
    return model, scores


def fit_spo2_calibration(points: Sequence[Tuple[float, float]]) -> SpO2Calibration:
    """
    Least-squares fit of SpO2 = a - b x R.

    Args:
        points: (R, reference SpO2) pairs

    Returns:
        Fitted SpO2Calibration

    Raises:
        DegenerateFit: If fewer than 2 distinct R values, or the fit leaves the valid range of a
    """
    ratios = np.array([point[0] for point in points], dtype=np.float64)
    spo2 = np.array([point[1] for point in points], dtype=np.float64)
    if len(np.unique(ratios)) < 2:
        raise DegenerateFit("calibration needs at least 2 distinct ratios")
    design = np.column_stack([np.ones_like(ratios), -ratios])
    (a, b), *_ = np.linalg.lstsq(design, spo2, rcond=None)
    try:
        return SpO2Calibration(a=float(a), b=float(b))
    except ValidationError as exc:
        raise DegenerateFit(f"fitted calibration a={a:.3f}, b={b:.3f} is out of range") from exc


class LearnerService:
    """Service training per-fold models for one experiment."""

    def __init__(self, channels: Sequence[Channel], plan: PreprocessPlan, lambda_grid: Sequence[float]):
        """Initialize service with feature and selection parameters."""
        self.channels = tuple(channels)
        self.plan = plan
        self.lambda_grid = list(lambda_grid)

    def fit_fold(
        self, fold: int, train_pairs: Sequence[LabeledPair], validation_pairs: Sequence[LabeledPair]
    ) -> LinearModel:
        """Train and select the model of one fold."""
        model, scores = select_and_train(train_pairs, validation_pairs, self.lambda_grid, self.channels, self.plan)
        logger.info(
            "Fold %d: lambda %s selected from %d candidates (%d train, %d validation pairs)",
            fold,
            model.ridge_lambda,
            len(scores),
            len(train_pairs),
            len(validation_pairs),
        )
        metadata = dict(model.metadata, fold=str(fold))
        return model.model_copy(update={"metadata": metadata})
