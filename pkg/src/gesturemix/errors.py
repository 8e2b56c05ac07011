"""Exception types shared across the package.

The CLI maps these onto exit codes: DataError -> 2, NumericalError -> 3.
"""


class GestureMixError(Exception):
    """Base class for all package errors."""


class DataError(GestureMixError, ValueError):
    """Invalid, degenerate, or malformed input data."""


class ModelFormatError(DataError):
    """A model file failed parsing or invariant checks.

    `field` names the offending section or key when known.
    """

    def __init__(self, message: str, field: str | None = None):
        if field is not None:
            message = f"{message} (field: {field})"
        super().__init__(message)
        self.field = field


class NumericalError(GestureMixError, RuntimeError):
    """Numerical failure: non-positive-definite covariance, EM breakdown."""
