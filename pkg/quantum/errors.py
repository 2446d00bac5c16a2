# Exception hierarchy shared by the numerical library and the CLI

from typing import Optional, Tuple


class QCorrError(Exception):
    """Base class for every error raised by qcorr."""


class InvalidArgumentError(QCorrError, ValueError):
    """Bad input: wrong dimension, non-Hermitian matrix, out-of-range parameter, t < 0."""


class NumericalFailureError(QCorrError, ArithmeticError):
    """A computation produced something that is not a valid result.

    `time` is the grid time being evaluated when the failure happened (if known) and
    `bracket` the (lo, hi) interval of a failed root search.
    """

    def __init__(self, message: str, time: Optional[float] = None,
                 bracket: Optional[Tuple[float, float]] = None):
        super().__init__(message)
        self.message = message
        self.time = time
        self.bracket = bracket

    def __str__(self) -> str:
        text = self.message
        if self.time is not None:
            text += f' (at t={self.time:.10g})'
        if self.bracket is not None:
            text += f' (bracket [{self.bracket[0]:.10g}, {self.bracket[1]:.10g}])'
        return text


class NotPSDError(NumericalFailureError):
    pass


class NotAStateError(NumericalFailureError):
    pass


class CompletePositivityViolationError(NumericalFailureError):
    pass


class DerivativeSingularityError(NumericalFailureError):
    """Kraus derivative requested at a square-root branch point of the kernel."""
