"""Exception hierarchy shared by every module of the package."""


class QuickCentError(Exception):
    """Base class for all package errors."""


class InputError(QuickCentError, ValueError):
    """Invalid argument or malformed input."""


class InsufficientDataError(QuickCentError):
    """Too few usable observations for an estimate."""


class DegenerateSampleError(QuickCentError):
    """Sample has no spread, so the estimate diverges."""


class DivergenceError(QuickCentError):
    """Requested quantity is infinite for the given parameters."""


class TrainingError(QuickCentError):
    """QuickCent training could not produce a model."""


class ModelConsistencyError(TrainingError):
    """Trained medians are not increasing, i.e. the model assumptions fail."""


class ModelFormatError(QuickCentError):
    """A model file could not be parsed."""

    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno
