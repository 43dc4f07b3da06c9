"""Exception hierarchy shared by every cogres module."""


class CogresError(Exception):
    """Base class for all errors raised by cogres."""


class FormatError(CogresError, ValueError):
    """A file could not be parsed."""


class DimensionError(CogresError, ValueError):
    """Array shapes or channel counts do not agree."""


class DataError(CogresError, ValueError):
    """Values are present but unusable (NaN, Inf, out of range)."""


class ValidationError(CogresError, ValueError):
    """A domain invariant does not hold."""


class ConfigError(CogresError, ValueError):
    """A configuration value is missing or invalid."""


class InsufficientDataError(CogresError, ValueError):
    """Too few samples for the requested computation."""


class NumericalError(CogresError, ArithmeticError):
    """An iterative or linear-algebra routine failed."""

    def __init__(self, message, last_estimate=None):
        super().__init__(message)
        self.last_estimate = last_estimate


class DivergenceError(NumericalError):
    """Reservoir states blew up."""

    def __init__(self, message, timestep):
        super().__init__(message)
        self.timestep = timestep


class DegenerateReservoirError(NumericalError):
    """A recurrent matrix has zero spectral radius and cannot be rescaled."""


class EvaluationError(CogresError):
    """A cross-validation fold failed."""

    def __init__(self, message, fold):
        super().__init__(message)
        self.fold = fold
