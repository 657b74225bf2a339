"""Exception hierarchy shared by every package under ``src``."""

from typing import Optional


class NpvoError(Exception):
    """Base class for all errors raised by this project."""


class InvalidArgumentError(NpvoError, ValueError):
    pass


class ShapeError(NpvoError, ValueError):
    pass


class NumericError(NpvoError, ArithmeticError):
    pass


class InsufficientHistoryError(NpvoError, ValueError):
    pass


class InsufficientSamplesError(NpvoError, ValueError):
    pass


class TrainingDivergedError(NumericError):
    """Raised when the training loss stops being finite.

    ``last_weights`` holds the last weight set whose loss was still finite.
    """

    def __init__(self, message: str, last_weights=None, iteration: Optional[int] = None):
        super().__init__(message)
        self.last_weights = last_weights
        self.iteration = iteration


class ConfigError(NpvoError, ValueError):
    """Invalid or unreadable configuration; ``field`` names the offending key."""

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(message)
        self.field = field


class VersionError(NpvoError, ValueError):
    """A file or config declares a newer format than this code understands."""
