"""Exception types shared across the package."""


class QPinnError(Exception):
    """Base class for all package errors."""


class ConfigurationError(QPinnError, ValueError):
    pass


class ShapeError(QPinnError, ValueError):
    pass


class UnsupportedActivationError(QPinnError, ValueError):
    pass


class NumericError(QPinnError, ArithmeticError):
    pass


class CatalogError(QPinnError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


class SnapshotVersionError(QPinnError):
    pass


class TrainingDiverged(NumericError):
    """Raised when the loss goes non-finite; carries the last finite state."""

    def __init__(self, message, last_good_model=None, trace=None, epoch=None):
        super().__init__(message)
        self.last_good_model = last_good_model
        self.trace = trace if trace is not None else []
        self.epoch = epoch
