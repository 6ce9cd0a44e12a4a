"""Time series invariant checks."""
import enum
from dataclasses import dataclass
from typing import List

import numpy as np

from ringkit.models.series import TimeSeries


class ViolationKind(str, enum.Enum):
    """Enum for time series invariant violations."""

    NON_MONOTONE = "non_monotone"
    NON_FINITE = "non_finite"
    LENGTH_MISMATCH = "length_mismatch"


@dataclass(frozen=True)
class Violation:
    """One invariant violation at a sample index."""

    kind: ViolationKind
    index: int
    message: str


def validate_series(series: TimeSeries) -> List[Violation]:
    """
    Report every invariant violation of a time series.

    A timestamp that does not strictly exceed its predecessor is reported at
    its own index; non-finite values are reported at theirs. Violations are
    returned sorted by index.

    Args:
        series: Series to check

    Returns:
        List of violations, empty when the series is valid
    """
    violations: List[Violation] = []
    name = series.channel.value

    if len(series.timestamps) != len(series.values):
        violations.append(
            Violation(
                ViolationKind.LENGTH_MISMATCH,
                min(len(series.timestamps), len(series.values)),
                f"{name}: {len(series.timestamps)} timestamps vs {len(series.values)} values",
            )
        )

    steps = np.diff(series.timestamps)
    for position in np.flatnonzero(steps <= 0):
        index = int(position) + 1
        violations.append(
            Violation(
                ViolationKind.NON_MONOTONE,
                index,
                f"{name}: timestamp {int(series.timestamps[index])} at index {index} "
                f"does not follow {int(series.timestamps[index - 1])}",
            )
        )

    for position in np.flatnonzero(~np.isfinite(series.values)):
        index = int(position)
        violations.append(
            Violation(ViolationKind.NON_FINITE, index, f"{name}: non-finite value at index {index}")
        )

    violations.sort(key=lambda violation: violation.index)
    return violations
