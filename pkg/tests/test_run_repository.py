"""Tests for run directory I/O."""
import json

import numpy as np
import pytest

from ringkit.exceptions import ConfigError, DataError
from ringkit.models.vital import VitalKind
from ringkit.repositories.run_repository import RunRepository
from ringkit.schemas.experiment import ExperimentConfig
from ringkit.schemas.report import ReportDocument
from ringkit.services.evaluation_service import EvaluatedPair, metrics
from ringkit.services.learner_service import train_arrays


def _pairs():
    return [
        EvaluatedPair(0.1 + 0.2, 1.0 / 3.0, 0, "P00", "S00", 0, "reflective", "sitting", "stationary", "hr", "fft"),
        EvaluatedPair(72.0, 71.25, 1, "P01", "S01", 30000, "transmissive", "walking", "motion", "hr", "fft", True),
    ]


@pytest.mark.unit
def test_pairs_round_trip_exactly(tmp_path):
    """Test that pairs.csv preserves every float bit."""
    repository = RunRepository(tmp_path)

    repository.write_pairs(_pairs())

    assert repository.read_pairs() == _pairs()


@pytest.mark.unit
def test_read_pairs_missing(tmp_path):
    """Test that a run without pairs.csv is a data error."""
    with pytest.raises(DataError):
        RunRepository(tmp_path).read_pairs()


@pytest.mark.unit
def test_reports_round_trip(tmp_path):
    """Test report.json and the report.csv header."""
    repository = RunRepository(tmp_path)
    reports = [metrics([(80.0, 82.0), (90.0, 88.0)], "hr", "fft")]

    repository.write_reports(ReportDocument(tool="ringkit", version="1.0.0", config_hash="abc", reports=reports))

    assert repository.read_reports() == reports
    header = (tmp_path / "report.csv").read_text(encoding="utf-8").splitlines()[0]
    assert header == "task,method,ring_type,scenario,n,mae,se_mae,rmse,mape,pearson"


@pytest.mark.unit
def test_model_round_trip(tmp_path, rng):
    """Test that fold models are written under models/."""
    x = rng.normal(size=(10, 2))
    model = train_arrays(x, x @ np.array([1.0, 2.0]) + 60.0, ["a", "b"], VitalKind.HR, 0.1)
    repository = RunRepository(tmp_path)

    path = repository.write_model(2, model)

    assert path == tmp_path / "models" / "fold_2.json"
    assert repository.read_model(2) == model


@pytest.mark.unit
def test_config_round_trip(tmp_path, experiment_payload):
    """Test that the normalized config reads back equal."""
    config = ExperimentConfig.model_validate(experiment_payload())
    repository = RunRepository(tmp_path)

    repository.write_config(config)

    assert repository.read_config() == config


@pytest.mark.unit
def test_read_config_missing_and_invalid(tmp_path):
    """Test the errors for a missing and an edited config.json."""
    repository = RunRepository(tmp_path)
    with pytest.raises(DataError):
        repository.read_config()

    (tmp_path / "config.json").write_text(json.dumps({"task": "hr"}), encoding="utf-8")
    with pytest.raises(ConfigError):
        repository.read_config()
