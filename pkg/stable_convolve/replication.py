"""Batched, data-parallel execution of Monte Carlo replicas.

Replicas are split into contiguous batches and handed to joblib workers. Each
replica draws from its own counter-based streams, so the batch layout and
the worker count never change the numbers; batch outputs are gathered in
order and every reduction downstream is a plain ordered sum, count or max.

Key features:
- Batch processing with configurable sizes
- Thread or process parallelism through joblib
- Degenerate (non-finite) replica accounting with the 1% failure rule
- Per-batch error capture with detailed messages

Example:
    >>> import numpy as np
    >>> from stable_convolve.replication import run_replicas
    >>>
    >>> def task(replicas):
    ...     return np.array([[float(r)] for r in replicas])
    >>>
    >>> result = run_replicas(task, n_replicas=10, batch_size=4)
    >>> result.replicas_processed, result.values.shape
    (10, (10, 1))
"""

import logging
import os
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from .errors import DegenerateRunError, ReplicaBatchError

logger = logging.getLogger(__name__)

THREADS_ENV = "STABLE_CONVOLVE_THREADS"
DEGENERATE_LIMIT = 0.01

ReplicaTask = Callable[[Sequence[int]], np.ndarray]


class ReplicaRunResult:
    """Result of running a replica task over all batches.

    Contains per-replica statistics in replica order along with counts of
    degenerate rows and batch failures.

    Attributes:
        replicas_processed (int): Number of replicas whose batch succeeded
        degenerate (int): Number of rows containing a non-finite value
        errors (int): Number of batches that raised
        error_details (List[str]): Messages of the failed batches

    Examples:
        >>> result = run_replicas(task, n_replicas=1000)
        >>> finite = result.values[result.finite_mask]
        >>> if result.errors > 0:
        ...     for error in result.error_details:
        ...         print(f"  - {error}")
    """

    def __init__(self):
        self.replicas_processed = 0
        self.degenerate = 0
        self.errors = 0
        self.error_details: List[str] = []
        self._batches: List[np.ndarray] = []

    @property
    def values(self) -> np.ndarray:
        if not self._batches:
            return np.empty((0,))
        return np.concatenate(self._batches, axis=0)

    @property
    def finite_mask(self) -> np.ndarray:
        values = self.values
        if values.size == 0:
            return np.zeros(values.shape[:1], dtype=bool)
        flat = values.reshape(values.shape[0], -1)
        return np.isfinite(flat).all(axis=1)

    @property
    def degenerate_fraction(self) -> float:
        if self.replicas_processed == 0:
            return 0.0
        return self.degenerate / self.replicas_processed

    def check_degenerate(self, context: str = "") -> None:
        """Raise DegenerateRunError when more than 1% of replicas overflowed."""
        if self.degenerate_fraction > DEGENERATE_LIMIT:
            raise DegenerateRunError(self.degenerate, self.replicas_processed, context)

    def check_errors(self, context: str = "") -> None:
        """Raise ReplicaBatchError when any batch failed."""
        if self.errors:
            raise ReplicaBatchError(self.errors, self.error_details, context)


def resolve_threads(threads: Optional[int] = None) -> int:
    """Return the worker count: explicit value, then the environment, then 1."""
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            logger.warning(f"Ignoring non-integer {THREADS_ENV}={env!r}")
    return 1


def _run_batch(
    task: ReplicaTask, batch: Sequence[int]
) -> Tuple[Sequence[int], Optional[np.ndarray], Optional[str]]:
    """Run one batch, capturing failures instead of raising."""
    try:
        return batch, np.asarray(task(batch), dtype=np.float64), None
    except Exception as e:
        return batch, None, f"{type(e).__name__}: {e}"


def run_replicas(
    task: ReplicaTask,
    n_replicas: int,
    batch_size: int = 64,
    n_jobs: Optional[int] = None,
    first_replica: int = 0,
) -> ReplicaRunResult:
    """Run ``task`` over replicas first_replica .. first_replica + n_replicas - 1.

    Args:
        task: Callable taking a sequence of replica indices and returning an
            array whose first axis has one row per replica
        n_replicas: Number of replicas
        batch_size: Replicas per batch
        n_jobs: Worker count (None resolves through the environment)
        first_replica: Index of the first replica

    Returns:
        ReplicaRunResult with per-replica rows in replica order
    """
    result = ReplicaRunResult()
    batch_size = max(1, int(batch_size))
    workers = resolve_threads(n_jobs)
    stop = first_replica + n_replicas
    batches = [
        range(start, min(start + batch_size, stop))
        for start in range(first_replica, stop, batch_size)
    ]
    logger.debug(
        f"Running {n_replicas} replicas in {len(batches)} batches on {workers} workers"
    )

    outputs = Parallel(n_jobs=workers, prefer="threads")(
        delayed(_run_batch)(task, batch) for batch in batches
    )

    for batch, rows, error in outputs:
        if error is not None:
            logger.error(f"Replica batch {batch.start}-{batch.stop - 1} failed: {error}")
            result.errors += 1
            result.error_details.append(
                f"Batch {batch.start}-{batch.stop - 1}: {error}"
            )
            continue
        if rows.shape[0] != len(batch):
            result.errors += 1
            result.error_details.append(
                f"Batch {batch.start}-{batch.stop - 1}: expected {len(batch)} rows, "
                f"got {rows.shape[0]}"
            )
            continue
        result._batches.append(rows)
        result.replicas_processed += len(batch)
        flat = rows.reshape(rows.shape[0], -1)
        result.degenerate += int(np.count_nonzero(~np.isfinite(flat).all(axis=1)))

    if result.degenerate:
        logger.warning(
            f"{result.degenerate}/{result.replicas_processed} replicas produced "
            f"non-finite values"
        )
    return result
