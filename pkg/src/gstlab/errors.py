"""Exception hierarchy.

Input problems raise plain ``ValueError``; everything below ``NumericalError``
signals that the numbers themselves made the requested operation impossible.
"""


class NumericalError(RuntimeError):
    """Base class for numerical failures."""


class ZeroSpectralRadius(NumericalError):
    """The operator has (numerically) no nonzero eigenvalue, e.g. a DAG."""


class ConvergenceError(NumericalError):
    """An eigenvalue / Schur iteration did not converge."""


class PartitionError(NumericalError):
    """Not enough separable eigenvalue gaps to build the requested groups."""


class IllConditionedError(NumericalError):
    """A solve or interpolation is too ill-conditioned to be trusted."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition
