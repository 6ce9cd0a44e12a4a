"""Pydantic schemas for everything read from or written to disk."""
from ringkit.schemas.estimators import RateBand, SpO2Calibration
from ringkit.schemas.experiment import (
    CalibrationConfig,
    DatasetConfig,
    EstimationMethod,
    EvalConfig,
    ExperimentConfig,
    FoldConfig,
    TrainingConfig,
    WindowingConfig,
)
from ringkit.schemas.model import LinearModel
from ringkit.schemas.preprocess import (
    DiffNormStep,
    FilterSpec,
    FilterStep,
    PreprocessPlan,
    SpectralStep,
    StandardizeStep,
)
from ringkit.schemas.report import REPORT_COLUMNS, MetricReport, ReportDocument, RunManifest
from ringkit.schemas.session import ActivitySpanSchema, SessionMeta
from ringkit.schemas.synth import CohortSpec, MotionKind, MotionSpec, SynthSpec

__all__ = [
    "RateBand",
    "SpO2Calibration",
    "CalibrationConfig",
    "DatasetConfig",
    "EstimationMethod",
    "EvalConfig",
    "ExperimentConfig",
    "FoldConfig",
    "TrainingConfig",
    "WindowingConfig",
    "LinearModel",
    "DiffNormStep",
    "FilterSpec",
    "FilterStep",
    "PreprocessPlan",
    "SpectralStep",
    "StandardizeStep",
    "REPORT_COLUMNS",
    "MetricReport",
    "ReportDocument",
    "RunManifest",
    "ActivitySpanSchema",
    "SessionMeta",
    "CohortSpec",
    "MotionKind",
    "MotionSpec",
    "SynthSpec",
]
