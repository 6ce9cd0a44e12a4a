"""Experiment orchestration: sessions to windows, pairs, folds, estimates and reports."""
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from pydantic import ValidationError

from ringkit import __version__
from ringkit.config import settings
from ringkit.exceptions import ConfigError, DataError
from ringkit.models.channel import Channel
from ringkit.models.estimate import Estimate
from ringkit.models.session import LabeledPair, RingType, SessionRecord
from ringkit.models.vital import VitalKind
from ringkit.repositories.run_repository import RunRepository
from ringkit.repositories.session_repository import SessionRepository
from ringkit.schemas.estimators import SpO2Calibration
from ringkit.schemas.experiment import DatasetConfig, EstimationMethod, ExperimentConfig
from ringkit.schemas.model import LinearModel
from ringkit.schemas.preprocess import PreprocessPlan
from ringkit.schemas.report import MetricReport, ReportDocument, RunManifest
from ringkit.schemas.synth import CohortSpec, SynthSpec
from ringkit.services.estimator_service import EstimatorService
from ringkit.services.evaluation_service import EvaluatedPair, EvaluationService
from ringkit.services.ingest_service import DropLedger, make_folds, pair_labels, summarize_labels, window_session
from ringkit.services.learner_service import LearnerService, fit_spo2_calibration
from ringkit.services.preprocess_service import default_plan
from ringkit.services.synth_service import expand_cohort
from ringkit.tasks.worker_tasks import (
    generate_session_task,
    load_session_task,
    prepare_session_task,
    run_fold_task,
    run_tasks,
)
from ringkit.utils.hashing import sha256_json

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SessionJob:
    """Windowing and pairing work for one session."""

    session: SessionRecord
    task: VitalKind
    channels: Tuple[Channel, ...]
    duration_s: float
    rate_hz: float
    stride_s: float
    gate_hz: float


@dataclass(frozen=True)
class FoldJob:
    """Training and test pairs of one fold rotation."""

    fold: int
    config: ExperimentConfig
    plan: PreprocessPlan
    train: Tuple[LabeledPair, ...]
    validation: Tuple[LabeledPair, ...]
    test: Tuple[LabeledPair, ...]


@dataclass
class FoldResult:
    """Evaluated test pairs and artifacts of one fold."""

    fold: int
    pairs: List[EvaluatedPair] = field(default_factory=list)
    model: Optional[LinearModel] = None
    counts: Dict[str, int] = field(default_factory=dict)


@dataclass
class RunResult:
    """Outcome of a run."""

    run_dir: Path
    reports: List[MetricReport]
    manifest: RunManifest


def prepare_session(job: SessionJob) -> Tuple[List[LabeledPair], Dict[str, int]]:
    """Window one session and pair its windows with references."""
    ledger = DropLedger()
    missing = [channel.value for channel in job.channels if job.session.signal(channel) is None]
    if missing:
        logger.info("Session %s lacks channels %s; skipped", job.session.session_id, missing)
        ledger.add("sessions_missing_channel")
        return [], ledger.as_dict()
    windows = window_session(
        job.session,
        job.duration_s,
        job.rate_hz,
        job.stride_s,
        gate_hz=job.gate_hz,
        channels=job.channels,
        ledger=ledger,
    )
    pairs = pair_labels(windows, job.session, job.task, ledger)
    return pairs, ledger.as_dict()


def _calibrations(job: FoldJob, ledger: DropLedger) -> Dict[RingType, SpO2Calibration]:
    """Calibration per ring type for the ratio method."""
    settings_block = job.config.spo2_calibration
    if settings_block.mode == "fixed":
        fixed = SpO2Calibration(a=settings_block.a, b=settings_block.b)
        return {ring_type: fixed for ring_type in RingType}

    calibrations = {ring_type: SpO2Calibration.for_ring(ring_type) for ring_type in RingType}
    if settings_block.mode == "fit":
        estimator = EstimatorService(job.config.task, EstimationMethod.RATIO, tuple(job.config.channels), job.plan)
        points: Dict[RingType, List[Tuple[float, float]]] = {}
        for pair in job.train:
            try:
                points.setdefault(pair.ring_type, []).append((estimator.ratio(pair.window), pair.reference))
            except DataError as exc:
                ledger.add("calibration_ratio_failed")
                logger.debug("%s: %s", pair.window, exc)
        for ring_type, ring_points in sorted(points.items()):
            calibrations[ring_type] = fit_spo2_calibration(ring_points)
            logger.info(
                "Fold %d: fitted %s calibration a=%.3f b=%.3f from %d windows",
                job.fold,
                ring_type.value,
                calibrations[ring_type].a,
                calibrations[ring_type].b,
                len(ring_points),
            )
    return calibrations


def run_fold(job: FoldJob) -> FoldResult:
    """
    Estimate every test pair of one fold.

    Ridge trains on the train split and selects on validation; the ratio
    method fits its calibration on the train split when configured to.
    Estimator failures drop the window and are counted.
    """
    config = job.config
    ledger = DropLedger()
    result = FoldResult(fold=job.fold)
    channels = tuple(config.channels)

    model = None
    if config.method == EstimationMethod.RIDGE:
        learner = LearnerService(channels, job.plan, config.training.lambda_grid)
        model = learner.fit_fold(job.fold, list(job.train), list(job.validation))
        result.model = model

    estimators: Dict[RingType, EstimatorService] = {}
    calibrations = _calibrations(job, ledger) if config.method == EstimationMethod.RATIO else {}
    for ring_type in RingType:
        estimators[ring_type] = EstimatorService(
            config.task,
            config.method,
            channels,
            job.plan,
            calibration=calibrations.get(ring_type),
            model=model,
        )

    for pair in job.test:
        try:
            reading = estimators[pair.ring_type].estimate(pair.window)
            estimate = Estimate(
                kind=config.task,
                value=reading.value,
                session_id=pair.session_id,
                start_ms=pair.start_ms,
                method=config.method.value,
            )
        except (DataError, ValueError) as exc:
            ledger.add("estimate_failed")
            logger.debug("Estimate failed for %r: %s", pair.window, exc)
            continue
        out_of_band = reading.out_of_band or estimate.out_of_band
        if out_of_band:
            ledger.add("out_of_band")
        result.pairs.append(
            EvaluatedPair(
                reference=pair.reference,
                estimate=estimate.value,
                fold=job.fold,
                subject_id=pair.subject_id,
                session_id=pair.session_id,
                start_ms=pair.start_ms,
                ring_type=pair.ring_type.value,
                activity=pair.activity.value,
                scenario=pair.scenario.value,
                task=config.task.value,
                method=config.method.value,
                out_of_band=out_of_band,
            )
        )
    result.counts = ledger.as_dict()
    return result


def _specs_for(dataset: DatasetConfig, seed: Optional[int] = None) -> List[SynthSpec]:
    if dataset.synth is not None:
        return list(dataset.synth)
    if dataset.cohort is not None:
        cohort = dataset.cohort
        if seed is not None:
            try:
                cohort = CohortSpec.model_validate({**cohort.model_dump(mode="json"), "seed": seed})
            except ValidationError as exc:
                raise ConfigError(f"invalid cohort seed {seed}: {exc.errors()[0]['msg']}") from exc
        return expand_cohort(cohort)
    raise ConfigError("dataset has no synth or cohort block to generate from")


def synthesize_dataset(dataset: DatasetConfig, out_dir: Union[str, Path], jobs: int = 1, seed: Optional[int] = None) -> List[Path]:
    """
    Generate the sessions of a dataset block and write them as session directories.

    Args:
        dataset: Dataset with a synth or cohort block
        out_dir: Dataset root to write into
        jobs: Worker processes
        seed: Overrides the cohort seed

    Returns:
        Written session directories
    """
    specs = _specs_for(dataset, seed)
    sessions = run_tasks(generate_session_task, specs, jobs)
    repository = SessionRepository(out_dir)
    written = [repository.save(session) for session in sessions]
    logger.info("Wrote %d synthetic sessions to %s", len(written), out_dir)
    return written


class ExperimentService:
    """Service running one experiment end to end."""

    def __init__(self, config: ExperimentConfig, jobs: int = 1):
        """
        Initialize service with a validated config.

        Args:
            config: Experiment configuration
            jobs: Worker processes; does not affect any output
        """
        self.config = config
        self.jobs = max(1, jobs)
        self.plan = config.preprocess if config.preprocess is not None else default_plan(config.task, config.method)
        self.ledger = DropLedger()

    def load_sessions(self) -> List[SessionRecord]:
        """
        Load or generate the dataset's sessions, sorted by session id.

        Raises:
            DataError: If session ids repeat
        """
        dataset = self.config.dataset
        if dataset.root is not None:
            directories = [str(path) for path in SessionRepository(dataset.root).list_session_dirs()]
            sessions = run_tasks(load_session_task, directories, self.jobs)
        else:
            sessions = run_tasks(generate_session_task, _specs_for(dataset), self.jobs)

        ids = [session.session_id for session in sessions]
        if len(set(ids)) != len(ids):
            raise DataError("dataset contains repeated session ids")
        sessions.sort(key=lambda session: session.session_id)

        for session in sessions:
            self.ledger.add("load_dropped_samples", session.load_stats.dropped_samples)
            self.ledger.add("load_dropped_labels", session.load_stats.dropped_labels)
        if self.config.ring_type is not None:
            kept = [session for session in sessions if session.ring_type == self.config.ring_type]
            self.ledger.add("sessions_other_ring_type", len(sessions) - len(kept))
            sessions = kept
        if not sessions:
            raise DataError("no sessions to evaluate")
        self.ledger.add("sessions", len(sessions))
        logger.info("Loaded %d sessions", len(sessions))
        return sessions

    def pair_sessions(self, sessions: Sequence[SessionRecord]) -> List[LabeledPair]:
        """Window and pair every session."""
        windowing = self.config.windowing
        jobs = [
            SessionJob(
                session=session,
                task=self.config.task,
                channels=tuple(self.config.channels),
                duration_s=windowing.duration_s,
                rate_hz=windowing.rate_hz,
                stride_s=windowing.resolved_stride_s,
                gate_hz=windowing.gate_hz,
            )
            for session in sessions
        ]
        pairs: List[LabeledPair] = []
        for session_pairs, counts in run_tasks(prepare_session_task, jobs, self.jobs):
            pairs.extend(session_pairs)
            for reason, count in counts.items():
                self.ledger.add(reason, count)
        self.ledger.add("candidate_windows", self.ledger.get("windows") + self.ledger.get("gate"))
        logger.info(
            "%d windows (%d dropped at the rate gate), %d labeled pairs",
            self.ledger.get("windows"),
            self.ledger.get("gate"),
            len(pairs),
        )
        return pairs

    def fold_jobs(self, sessions: Sequence[SessionRecord], pairs: Sequence[LabeledPair]) -> List[FoldJob]:
        """Split pairs into one job per fold rotation."""
        plan = make_folds([session.subject_id for session in sessions], self.config.folds.k, self.config.fold_seed)
        logger.info("Fold sizes (subjects): %s", plan.sizes())
        jobs = []
        for fold in range(plan.k):
            train, validation, test = plan.split(fold)
            jobs.append(
                FoldJob(
                    fold=fold,
                    config=self.config,
                    plan=self.plan,
                    train=tuple(pair for pair in pairs if pair.subject_id in train),
                    validation=tuple(pair for pair in pairs if pair.subject_id in validation),
                    test=tuple(pair for pair in pairs if pair.subject_id in test),
                )
            )
        return jobs

    def run(self, out_dir: Optional[Union[str, Path]] = None) -> RunResult:
        """
        Run the experiment and write its artifacts.

        Args:
            out_dir: Run directory; defaults to config.output_dir

        Returns:
            RunResult

        Raises:
            ConfigError: If the config cannot be executed
            DataError: If the data cannot be processed
        """
        config = self.config
        inapplicable = config.training.inapplicable_fields
        if inapplicable:
            logger.warning("training.%s ignored: the ridge baseline has no epochs or batches", ", training.".join(inapplicable))

        sessions = self.load_sessions()
        pairs = self.pair_sessions(sessions)
        results: List[FoldResult] = run_tasks(run_fold_task, self.fold_jobs(sessions, pairs), self.jobs)

        evaluated: List[EvaluatedPair] = []
        for result in results:
            evaluated.extend(result.pairs)
            for reason, count in result.counts.items():
                self.ledger.add(reason, count)

        evaluation = EvaluationService(
            stratify_by=config.eval.stratify_by,
            include_out_of_band=config.eval.include_out_of_band,
            merge_mode=config.eval.merge_mode,
        )
        kept, excluded = evaluation.select(evaluated)
        self.ledger.add("out_of_band_excluded", excluded)
        self.ledger.add("evaluated", len(kept))
        reports = evaluation.build_reports(evaluated)

        config_hash = sha256_json(config.model_dump(mode="json"))
        manifest = RunManifest(
            tool=settings.APP_NAME,
            version=__version__,
            config_hash=config_hash,
            seed=config.seed,
            task=config.task.value,
            method=config.method.value,
            folds=config.folds.k,
            counts=self.ledger.as_dict(),
            inapplicable=[f"training.{name}" for name in inapplicable],
        )

        run_dir = Path(out_dir if out_dir is not None else config.output_dir)
        repository = RunRepository(run_dir)
        repository.write_config(config)
        repository.write_reports(
            ReportDocument(tool=settings.APP_NAME, version=__version__, config_hash=config_hash, reports=reports)
        )
        repository.write_pairs(evaluated)
        repository.write_dataset_summary(summarize_labels(sessions))
        for result in results:
            if result.model is not None:
                repository.write_model(result.fold, result.model)
        repository.write_manifest(manifest)
        logger.info("Run written to %s: %d evaluated windows, %d report rows", run_dir, len(kept), len(reports))
        return RunResult(run_dir=run_dir, reports=reports, manifest=manifest)


def rerender_report(run_dir: Union[str, Path], out_dir: Optional[Union[str, Path]] = None) -> List[MetricReport]:
    """
    Rebuild report.json and report.csv from a run's pairs.csv and config.json.

    Args:
        run_dir: Existing run directory
        out_dir: Where to write; defaults to run_dir

    Returns:
        Rebuilt reports
    """
    source = RunRepository(run_dir)
    config = source.read_config()
    pairs = source.read_pairs()
    evaluation = EvaluationService(
        stratify_by=config.eval.stratify_by,
        include_out_of_band=config.eval.include_out_of_band,
        merge_mode=config.eval.merge_mode,
    )
    reports = evaluation.build_reports(pairs)
    config_hash = sha256_json(config.model_dump(mode="json"))
    target = RunRepository(out_dir if out_dir is not None else run_dir)
    target.write_reports(
        ReportDocument(tool=settings.APP_NAME, version=__version__, config_hash=config_hash, reports=reports)
    )
    logger.info("Re-rendered %d report rows from %d pairs", len(reports), len(pairs))
    return reports
