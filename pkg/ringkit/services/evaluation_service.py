"""Accuracy metrics, fold merging and stratified reports."""
import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from ringkit.config import settings
from ringkit.exceptions import DataError
from ringkit.schemas.report import MetricReport

logger = logging.getLogger(__name__)

ALL = "all"


class EmptyInput(DataError):
    """Exception raised when metrics are requested for no pairs."""

    pass


@dataclass(frozen=True)
class EvaluatedPair:
    """A test-window estimate with its reference and stratification keys."""

    reference: float
    estimate: float
    fold: int
    subject_id: str
    session_id: str
    start_ms: int
    ring_type: str
    activity: str
    scenario: str
    task: str
    method: str
    out_of_band: bool = False


PairLike = Union[EvaluatedPair, Tuple[float, float]]


def _values(pairs: Iterable[PairLike]) -> Tuple[List[float], List[float]]:
    references: List[float] = []
    estimates: List[float] = []
    for pair in pairs:
        if isinstance(pair, EvaluatedPair):
            references.append(float(pair.reference))
            estimates.append(float(pair.estimate))
        else:
            reference, estimate = pair
            references.append(float(reference))
            estimates.append(float(estimate))
    return references, estimates


def _pearson(references: List[float], estimates: List[float]) -> Optional[float]:
    n = len(references)
    if n < 2:
        return None
    mean_y = math.fsum(references) / n
    mean_e = math.fsum(estimates) / n
    dy = [y - mean_y for y in references]
    de = [e - mean_e for e in estimates]
    var_y = math.fsum(d * d for d in dy)
    var_e = math.fsum(d * d for d in de)
    if var_y == 0 or var_e == 0:
        return None
    covariance = math.fsum(a * b for a, b in zip(dy, de))
    return max(-1.0, min(1.0, covariance / math.sqrt(var_y * var_e)))


def metrics(
    pairs: Sequence[PairLike],
    task: str = "",
    method: str = "",
    ring_type: str = ALL,
    scenario: str = ALL,
) -> MetricReport:
    """
    MAE, RMSE, MAPE, Pearson r and the standard error of the absolute errors.

    Sums are exactly rounded, so the result does not depend on pair order.
    Pairs with a zero reference are left out of MAPE only and counted in
    ``mape_excluded``. Pearson r is None for fewer than two pairs or when
    either side has zero variance.

    Args:
        pairs: (reference, estimate) tuples or EvaluatedPair objects
        task: Task label for the report
        method: Method label for the report
        ring_type: Ring stratum label
        scenario: Scenario or activity stratum label

    Returns:
        MetricReport

    Raises:
        EmptyInput: If pairs is empty
    """
    references, estimates = _values(pairs)
    n = len(references)
    if n == 0:
        raise EmptyInput(f"no pairs to evaluate for {task}/{method}/{ring_type}/{scenario}")

    errors = [e - y for y, e in zip(references, estimates)]
    absolute = [abs(error) for error in errors]
    mae = math.fsum(absolute) / n
    rmse = math.sqrt(math.fsum(error * error for error in errors) / n)
    if n > 1:
        se_mae = math.sqrt(math.fsum((a - mae) ** 2 for a in absolute) / (n - 1)) / math.sqrt(n)
    else:
        se_mae = 0.0

    relative = [abs(error / y) for error, y in zip(errors, references) if y != 0]
    mape = 100.0 * math.fsum(relative) / len(relative) if relative else None

    notes: List[str] = []
    pearson = _pearson(references, estimates)
    if pearson is None and n >= 2:
        notes.append("degenerate_correlation")
    low_n = n < settings.LOW_N_THRESHOLD
    if low_n:
        notes.append("low_n")

    return MetricReport(
        task=task,
        method=method,
        ring_type=ring_type,
        scenario=scenario,
        n=n,
        mae=mae,
        se_mae=se_mae,
        # rounding can leave rmse an ulp below mae
        rmse=max(rmse, mae),
        mape=mape,
        mape_excluded=n - len(relative),
        pearson=pearson,
        low_n=low_n,
        notes=notes,
    )


def merge_folds(
    per_fold: Sequence[Sequence[PairLike]],
    mode: str = "pooled",
    task: str = "",
    method: str = "",
    ring_type: str = ALL,
    scenario: str = ALL,
) -> MetricReport:
    """
    Combine test-fold results into one report.

    ``pooled`` concatenates every fold's pairs and computes the metrics once;
    ``mean_of_folds`` averages per-fold metrics and records the spread of
    the per-fold MAE.

    Raises:
        EmptyInput: If no fold holds a pair
    """
    pooled = [pair for fold in per_fold for pair in fold]
    report = metrics(pooled, task, method, ring_type, scenario)
    if mode == "pooled":
        return report
    if mode != "mean_of_folds":
        raise ValueError(f"unknown merge mode {mode!r}")

    fold_reports = [metrics(fold, task, method, ring_type, scenario) for fold in per_fold if len(fold)]
    count = len(fold_reports)

    def mean(values: List[float]) -> float:
        return math.fsum(values) / len(values)

    maes = [item.mae for item in fold_reports]
    mapes = [item.mape for item in fold_reports]
    pearsons = [item.pearson for item in fold_reports]
    notes = list(report.notes)
    if None in pearsons and "degenerate_correlation" not in notes:
        notes.append("degenerate_correlation")
    fold_mae = mean(maes)
    fold_std = math.sqrt(math.fsum((m - fold_mae) ** 2 for m in maes) / count)
    fold_rmse = mean([item.rmse for item in fold_reports])
    return report.model_copy(
        update={
            "mae": fold_mae,
            "rmse": max(fold_rmse, fold_mae),
            "se_mae": mean([item.se_mae for item in fold_reports]),
            "mape": None if None in mapes else mean(mapes),
            "pearson": None if None in pearsons else mean(pearsons),
            "fold_std_mae": fold_std,
            "notes": notes,
        }
    )


def _key(pair: EvaluatedPair, by: str) -> str:
    if by == "scenario":
        return pair.scenario
    if by == "activity":
        return pair.activity
    raise ValueError(f"cannot stratify by {by!r}")


def _by_fold(pairs: Sequence[EvaluatedPair]) -> List[List[EvaluatedPair]]:
    folds: Dict[int, List[EvaluatedPair]] = {}
    for pair in pairs:
        folds.setdefault(pair.fold, []).append(pair)
    return [folds[fold] for fold in sorted(folds)]


def stratify(
    pairs: Sequence[EvaluatedPair],
    by: str,
    mode: str = "pooled",
    task: str = "",
    method: str = "",
    ring_type: str = ALL,
) -> Dict[str, MetricReport]:
    """
    Metrics per scenario or activity group.

    Groups with fewer than settings.LOW_N_THRESHOLD pairs are flagged low_n.

    Args:
        pairs: Evaluated pairs
        by: "scenario" or "activity"
        mode: Fold merge mode

    Returns:
        Map of group name to MetricReport, sorted by name
    """
    groups: Dict[str, List[EvaluatedPair]] = {}
    for pair in pairs:
        groups.setdefault(_key(pair, by), []).append(pair)
    return {
        name: merge_folds(_by_fold(groups[name]), mode, task, method, ring_type, name)
        for name in sorted(groups)
    }


class EvaluationService:
    """Service turning evaluated pairs into the rows of a run report."""

    def __init__(
        self,
        stratify_by: Sequence[str] = ("scenario",),
        include_out_of_band: bool = True,
        merge_mode: str = "pooled",
    ):
        """Initialize service with evaluation options."""
        self.stratify_by = list(stratify_by)
        self.include_out_of_band = include_out_of_band
        self.merge_mode = merge_mode

    def select(self, pairs: Sequence[EvaluatedPair]) -> Tuple[List[EvaluatedPair], int]:
        """Pairs entering the metrics and the count of excluded out-of-band pairs."""
        if self.include_out_of_band:
            return list(pairs), 0
        kept = [pair for pair in pairs if not pair.out_of_band]
        return kept, len(pairs) - len(kept)

    def build_reports(self, pairs: Sequence[EvaluatedPair]) -> List[MetricReport]:
        """
        Reports for ring type "all" and each ring type present, each over
        scenario "all" and every requested stratum.

        Returns:
            Reports sorted by task, method, ring type and stratum
        """
        kept, excluded = self.select(pairs)
        if excluded:
            logger.info("Excluded %d out-of-band estimates from metrics", excluded)
        if not kept:
            raise EmptyInput("no evaluated pairs to report")

        reports = []
        ring_types = [ALL] + sorted({pair.ring_type for pair in kept})
        for task, method in sorted({(pair.task, pair.method) for pair in kept}):
            for ring_type in ring_types:
                subset = [
                    pair
                    for pair in kept
                    if pair.task == task and pair.method == method and ring_type in (ALL, pair.ring_type)
                ]
                if not subset:
                    continue
                reports.append(merge_folds(_by_fold(subset), self.merge_mode, task, method, ring_type, ALL))
                for by in self.stratify_by:
                    reports.extend(stratify(subset, by, self.merge_mode, task, method, ring_type).values())

        reports.sort(key=lambda report: (report.task, report.method, report.ring_type, report.scenario))
        return reports
