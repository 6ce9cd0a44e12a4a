"""Run directory repository: config, reports, pairs, manifest and models."""
import json
import logging
from dataclasses import asdict, fields
from pathlib import Path
from typing import Dict, List, Sequence, Union

import pandas as pd
from pydantic import BaseModel, ValidationError

from ringkit.config import settings
from ringkit.exceptions import ConfigError, DataError
from ringkit.schemas.experiment import ExperimentConfig
from ringkit.schemas.model import LinearModel
from ringkit.schemas.report import REPORT_COLUMNS, MetricReport, ReportDocument, RunManifest
from ringkit.services.evaluation_service import EvaluatedPair

logger = logging.getLogger(__name__)

CONFIG_FILE = "config.json"
REPORT_JSON = "report.json"
REPORT_CSV = "report.csv"
PAIRS_CSV = "pairs.csv"
SUMMARY_CSV = "dataset_summary.csv"
MANIFEST_FILE = "manifest.json"
MODELS_DIR = "models"
PAIR_COLUMNS = [item.name for item in fields(EvaluatedPair)]
# Round-trip precision so `report` reproduces the metrics of `run`.
PAIR_FLOAT_FORMAT = "%.17g"

PathLike = Union[str, Path]


class RunRepository:
    """Repository for one run output directory."""

    def __init__(self, run_dir: PathLike):
        """Initialize repository with a run directory."""
        self.run_dir = Path(run_dir)

    def _path(self, name: str) -> Path:
        return self.run_dir / name

    def _write_json(self, name: str, payload: BaseModel) -> Path:
        path = self._path(name)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(payload.model_dump(mode="json"), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return path

    def _write_csv(self, name: str, frame: pd.DataFrame, float_format: str) -> Path:
        path = self._path(name)
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, float_format=float_format, na_rep="", lineterminator="\n")
        return path

    def write_config(self, config: ExperimentConfig) -> Path:
        """Write the normalized experiment config."""
        return self._write_json(CONFIG_FILE, config)

    def read_config(self) -> ExperimentConfig:
        """
        Read the config copied into the run.

        Raises:
            DataError: If the run has no config.json
            ConfigError: If the copied config no longer validates
        """
        path = self._path(CONFIG_FILE)
        if not path.is_file():
            raise DataError(f"{path}: not a run directory (config.json missing)")
        try:
            return ExperimentConfig.model_validate_json(path.read_text(encoding="utf-8"))
        except ValidationError as exc:
            raise ConfigError(f"{path}: {exc.error_count()} invalid fields in run config") from exc

    def write_reports(self, document: ReportDocument) -> List[Path]:
        """Write report.json and report.csv."""
        rows = [report.row() for report in document.reports]
        frame = pd.DataFrame(rows, columns=REPORT_COLUMNS)
        return [
            self._write_json(REPORT_JSON, document),
            self._write_csv(REPORT_CSV, frame, settings.REPORT_FLOAT_FORMAT),
        ]

    def read_reports(self) -> List[MetricReport]:
        path = self._path(REPORT_JSON)
        return ReportDocument.model_validate_json(path.read_text(encoding="utf-8")).reports

    def write_pairs(self, pairs: Sequence[EvaluatedPair]) -> Path:
        """Write one row per evaluated window."""
        frame = pd.DataFrame([asdict(pair) for pair in pairs], columns=PAIR_COLUMNS)
        return self._write_csv(PAIRS_CSV, frame, PAIR_FLOAT_FORMAT)

    def read_pairs(self) -> List[EvaluatedPair]:
        """
        Read evaluated pairs back from pairs.csv.

        Raises:
            DataError: If pairs.csv is missing or malformed
        """
        path = self._path(PAIRS_CSV)
        if not path.is_file():
            raise DataError(f"{path}: pairs.csv missing")
        frame = pd.read_csv(
            path,
            dtype={
                "subject_id": str,
                "session_id": str,
                "ring_type": str,
                "activity": str,
                "scenario": str,
                "task": str,
                "method": str,
            },
            keep_default_na=False,
            float_precision="round_trip",
        )
        if list(frame.columns) != PAIR_COLUMNS:
            raise DataError(f"{path}: unexpected columns {list(frame.columns)}")
        return [
            EvaluatedPair(
                reference=float(row.reference),
                estimate=float(row.estimate),
                fold=int(row.fold),
                subject_id=row.subject_id,
                session_id=row.session_id,
                start_ms=int(row.start_ms),
                ring_type=row.ring_type,
                activity=row.activity,
                scenario=row.scenario,
                task=row.task,
                method=row.method,
                out_of_band=str(row.out_of_band) == "True",
            )
            for row in frame.itertuples(index=False)
        ]

    def write_dataset_summary(self, rows: Sequence[Dict[str, object]]) -> Path:
        """Write per-activity label statistics."""
        columns = ["activity", "kind", "count", "mean", "std", "min", "max", "hours"]
        return self._write_csv(SUMMARY_CSV, pd.DataFrame(list(rows), columns=columns), settings.REPORT_FLOAT_FORMAT)

    def write_manifest(self, manifest: RunManifest) -> Path:
        return self._write_json(MANIFEST_FILE, manifest)

    def write_model(self, fold: int, model: LinearModel) -> Path:
        """Write the model of one fold to models/fold_<i>.json."""
        return self._write_json(f"{MODELS_DIR}/fold_{fold}.json", model)

    def read_model(self, fold: int) -> LinearModel:
        path = self._path(f"{MODELS_DIR}/fold_{fold}.json")
        return LinearModel.model_validate_json(path.read_text(encoding="utf-8"))
