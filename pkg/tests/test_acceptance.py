"""End-to-end accuracy, protocol and determinism checks on synthetic data."""
import dataclasses
import time

import numpy as np
import pytest

from ringkit.models.channel import Channel
from ringkit.models.session import RingType
from ringkit.models.vital import VitalKind
from ringkit.repositories.session_repository import SessionRepository, write_session
from ringkit.schemas.estimators import RateBand, SpO2Calibration
from ringkit.schemas.experiment import EstimationMethod, ExperimentConfig
from ringkit.schemas.synth import CohortSpec, SynthSpec
from ringkit.services.estimator_service import EstimatorService, rate_from_spectrum, spo2_estimate, spo2_ratio
from ringkit.services.experiment_service import ExperimentService, run_fold
from ringkit.services.ingest_service import make_folds, window_session
from ringkit.services.preprocess_service import default_plan, welch_psd
from ringkit.services.synth_service import brute_force_dft_argmax, expand_cohort, generate, synthesize_signals
from tests.conftest import START_MS, tone

RATE = 100.0
RUN_FILES = ("report.csv", "report.json", "manifest.json", "pairs.csv", "dataset_summary.csv", "config.json")


# ============================================================================
# Estimator oracles
# ============================================================================

@pytest.mark.slow
def test_peak_count_error_within_one_beat_per_window():
    """Test peak HR within 60/30 BPM on 500 clean pulse trains from 40 to 170 BPM, in under 30 s."""
    rng = np.random.default_rng(2024)
    service = EstimatorService(
        VitalKind.HR, EstimationMethod.PEAK, (Channel.PPG_IR,), default_plan(VitalKind.HR, "peak")
    )

    elapsed = 0.0
    for index, hr in enumerate(rng.uniform(40.0, 170.0, 500)):
        spec = SynthSpec(start_ms=START_MS, duration_s=30.0, hr_bpm=float(hr), seed=index)
        window = window_session(generate(spec), 30.0, RATE, 30.0)[0]
        started = time.perf_counter()
        estimate = service.estimate(window)
        elapsed += time.perf_counter() - started
        error = abs(estimate.value - hr)
        assert error <= 60.0 / 30.0 + 1e-9, f"hr {hr:.2f}: error {error:.3f}"

    assert elapsed < 30.0


@pytest.mark.slow
@pytest.mark.parametrize("kind,duration_s", [(VitalKind.HR, 30.0), (VitalKind.RR, 60.0)])
def test_spectral_rate_matches_brute_force_dft(kind, duration_s):
    """Test Welch peak rates against a 0.001 Hz direct DFT search on 200 tones."""
    band = RateBand.for_kind(kind)
    rng = np.random.default_rng(99)
    t = np.arange(int(duration_s * RATE)) / RATE
    margin = 0.1

    for freq in rng.uniform(band.min_hz + margin, band.max_hz - margin, 200):
        x = tone(t, freq, phase=float(rng.uniform(0.0, 2 * np.pi)))
        spectrum = welch_psd(x, RATE)

        estimated_hz = rate_from_spectrum(spectrum, band).value / 60.0
        oracle_hz = brute_force_dft_argmax(x, RATE, band)

        assert abs(estimated_hz - oracle_hz) <= spectrum.resolution_hz + 0.001, f"tone {freq:.4f} Hz"


@pytest.mark.integration
@pytest.mark.parametrize("ring_type", list(RingType))
@pytest.mark.parametrize("target_ratio", [0.5, 0.8, 1.0, 1.5])
def test_ratio_of_ratios_closure(ring_type, target_ratio):
    """Test that generated channels carry R and the calibration maps it exactly."""
    spec = SynthSpec(
        start_ms=START_MS, duration_s=30.0, ring_type=ring_type, target_R=target_ratio, noise_snr_db=30.0, seed=4
    )
    signals = synthesize_signals(spec)
    calibration = SpO2Calibration.for_ring(ring_type)

    ratio = spo2_ratio(signals.series[Channel.PPG_IR].values, signals.series[Channel.PPG_RED].values, RATE)

    assert ratio == pytest.approx(target_ratio, abs=0.02)
    assert spo2_estimate(target_ratio, calibration).value == pytest.approx(
        calibration.a - calibration.b * target_ratio, abs=1e-9
    )


# ============================================================================
# Protocol
# ============================================================================

@pytest.fixture
def ridge_service(experiment_payload):
    """Ridge HR experiment over 34 single-session subjects."""
    payload = experiment_payload(
        method="ridge",
        dataset={"cohort": {"n_subjects": 34, "activities": ["sitting"], "duration_s": 30, "seed": 8}},
        folds={"k": 5},
    )
    return ExperimentService(ExperimentConfig.model_validate(payload))


@pytest.mark.slow
def test_fold_protocol_is_subject_disjoint(ridge_service):
    """Test fold sizes, single testing per subject and disjoint splits."""
    sessions = ridge_service.load_sessions()
    pairs = ridge_service.pair_sessions(sessions)
    jobs = ridge_service.fold_jobs(sessions, pairs)
    plan = make_folds([session.subject_id for session in sessions], 5, ridge_service.config.fold_seed)

    assert sorted(plan.sizes()) == [6, 7, 7, 7, 7]
    tested = [pair.subject_id for job in jobs for pair in job.test]
    assert sorted(tested) == sorted(session.subject_id for session in sessions)
    for job in jobs:
        train = {pair.subject_id for pair in job.train}
        validation = {pair.subject_id for pair in job.validation}
        test = {pair.subject_id for pair in job.test}
        assert not train & test
        assert not validation & test
        assert not train & validation


@pytest.mark.slow
def test_ridge_training_ignores_test_fold(ridge_service):
    """Test that replacing a fold's test pairs leaves its model bit-identical."""
    sessions = ridge_service.load_sessions()
    jobs = ridge_service.fold_jobs(sessions, ridge_service.pair_sessions(sessions))
    corrupted_test = tuple(
        dataclasses.replace(pair, reference=pair.reference + 40.0) for pair in jobs[1].test
    )

    clean = run_fold(jobs[0])
    corrupted = run_fold(dataclasses.replace(jobs[0], test=corrupted_test))

    assert clean.model.model_dump() == corrupted.model.model_dump()
    assert [pair.reference for pair in clean.pairs] != [pair.reference for pair in corrupted.pairs]


# ============================================================================
# Motion degradation
# ============================================================================

@pytest.mark.slow
@pytest.mark.parametrize("method", ["peak", "fft"])
def test_motion_degrades_hr_accuracy(tmp_path, experiment_payload, method):
    """Test that motion-scenario HR error exceeds stationary error."""
    config = ExperimentConfig.model_validate(experiment_payload(method=method))

    result = ExperimentService(config).run(tmp_path / method)

    overall = {report.scenario: report for report in result.reports if report.ring_type == "all"}
    assert overall["motion"].mae > overall["stationary"].mae
    assert overall["all"].n == overall["motion"].n + overall["stationary"].n


# ============================================================================
# Determinism
# ============================================================================

@pytest.mark.slow
def test_run_outputs_identical_across_worker_counts(tmp_path, experiment_payload):
    """Test byte-identical run files for one and two workers."""
    config = ExperimentConfig.model_validate(experiment_payload())

    ExperimentService(config, jobs=1).run(tmp_path / "serial")
    ExperimentService(config, jobs=2).run(tmp_path / "parallel")

    for name in RUN_FILES:
        assert (tmp_path / "serial" / name).read_bytes() == (tmp_path / "parallel" / name).read_bytes(), name


@pytest.mark.integration
def test_synth_write_load_write_is_stable(tmp_path):
    """Test that rewriting loaded synthetic sessions reproduces every file."""
    cohort = CohortSpec(
        n_subjects=2,
        activities=["sitting", "walking"],
        ring_types=[RingType.REFLECTIVE, RingType.TRANSMISSIVE],
        duration_s=20.0,
        seed=12,
    )
    for spec in expand_cohort(cohort):
        write_session(generate(spec), tmp_path / "first" / spec.session_id)

    for session in SessionRepository(tmp_path / "first").load_all():
        write_session(session, tmp_path / "second" / session.session_id)

    first = sorted(path.relative_to(tmp_path / "first") for path in (tmp_path / "first").rglob("*.*"))
    second = sorted(path.relative_to(tmp_path / "second") for path in (tmp_path / "second").rglob("*.*"))
    assert first == second
    assert len(first) == 8 * 3
    for relative in first:
        assert (tmp_path / "first" / relative).read_bytes() == (tmp_path / "second" / relative).read_bytes()
