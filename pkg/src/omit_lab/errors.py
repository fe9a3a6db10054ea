"""Exception hierarchy.

Each class carries a ``category`` string that the CLI maps to an exit code.
"""


class OmitError(Exception):
    category = "internal"


class InvalidParameterError(OmitError, ValueError):
    category = "validation"


class ConvergenceError(OmitError):
    category = "convergence"

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class SolverInternalError(OmitError):
    category = "convergence"


class SingularityError(OmitError):
    category = "convergence"


class DegenerateModeError(OmitError):
    category = "validation"


class UndefinedCriticalPointError(OmitError):
    category = "validation"


class InstabilityError(OmitError):
    category = "convergence"


class StiffnessError(OmitError):
    category = "convergence"


class ConditioningError(OmitError):
    category = "validation"


class InsufficientDataError(OmitError):
    category = "validation"


class GridPointError(OmitError):
    """A core-model failure at one grid point of a sweep."""

    def __init__(self, index, cause):
        super().__init__(f"grid point {index}: {cause}")
        self.index = index
        self.cause = cause
        self.category = getattr(cause, "category", "internal")


class ConfigError(OmitError):
    category = "validation"

    def __init__(self, message, key=None, line=None):
        super().__init__(message)
        self.key = key
        self.line = line


class OutputError(OmitError):
    category = "io"
