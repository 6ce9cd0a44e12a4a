"""Process-pool entry points for session and fold work."""
import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, List, Sequence, Tuple, TypeVar

from ringkit.models.session import LabeledPair, SessionRecord
from ringkit.repositories.session_repository import load_session
from ringkit.schemas.synth import SynthSpec
from ringkit.services.synth_service import generate

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def run_tasks(func: Callable[[T], R], items: Sequence[T], jobs: int) -> List[R]:
    """
    Map a module-level function over items, in order.

    Runs inline for one job; otherwise in a process pool. Results keep the
    input order at any worker count.
    """
    if jobs <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    workers = min(jobs, len(items))
    logger.debug("Running %d %s tasks on %d workers", len(items), func.__name__, workers)
    with ProcessPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, items))


def load_session_task(directory: str) -> SessionRecord:
    """Load one session directory."""
    return load_session(directory)


def generate_session_task(spec: SynthSpec) -> SessionRecord:
    """Generate one synthetic session."""
    return generate(spec)


def prepare_session_task(job) -> Tuple[List[LabeledPair], dict]:
    """Window and pair one session; returns pairs and drop counts."""
    from ringkit.services.experiment_service import prepare_session

    return prepare_session(job)


def run_fold_task(job):
    """Train (if needed), estimate and collect one test fold."""
    from ringkit.services.experiment_service import run_fold

    return run_fold(job)
