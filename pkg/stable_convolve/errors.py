"""Exception hierarchy for stable_convolve."""

from typing import List, Optional

import numpy as np


class StableConvolveError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(StableConvolveError, ValueError):
    """A parameter lies outside the mathematical domain of an operation."""


class ContractError(StableConvolveError, ValueError):
    """Inputs that should be aligned or compatible are not."""


class InsufficientDataError(StableConvolveError, ValueError):
    """Too few usable points to fit a scaling exponent."""


class DegenerateRunError(StableConvolveError, RuntimeError):
    """Too many replicas overflowed for the estimate to be trusted.

    Attributes:
        degenerate (int): Number of replicas with non-finite values
        replicas (int): Total number of replicas run
    """

    def __init__(self, degenerate: int, replicas: int, context: str = ""):
        self.degenerate = degenerate
        self.replicas = replicas
        where = f" ({context})" if context else ""
        super().__init__(
            f"{degenerate}/{replicas} replicas degenerate{where}, "
            f"exceeding the 1% limit"
        )


class BlowUpError(StableConvolveError, RuntimeError):
    """The Burgers state became non-finite during time stepping.

    Attributes:
        step (int): Index of the step that produced non-finite coefficients
        time (float): Grid time at the start of that step
        last_coeffs (numpy.ndarray, optional): Last finite coefficients, for a
            rerun at smaller dt
    """

    def __init__(
        self,
        step: int,
        time: float,
        last_coeffs: Optional[np.ndarray] = None,
    ):
        self.step = step
        self.time = time
        self.last_coeffs = last_coeffs
        super().__init__(
            f"Burgers state blew up at step {step} (t={time:.6g}); "
            f"retry with a smaller dt"
        )


class ReplicaBatchError(StableConvolveError, RuntimeError):
    """One or more replica batches raised instead of returning rows.

    Attributes:
        failed (int): Number of failed batches
        details (List[str]): Message per failed batch
    """

    def __init__(self, failed: int, details: List[str], context: str = ""):
        self.failed = failed
        self.details = list(details)
        where = f" {context}" if context else ""
        super().__init__(
            f"{failed} replica batches failed{where}: {'; '.join(self.details)}"
        )
