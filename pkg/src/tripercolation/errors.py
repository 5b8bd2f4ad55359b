"""Exception hierarchy shared by the simulator, the analytic engine and the CLI."""


class TriPercolationError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(TriPercolationError, ValueError):
    pass


class InvalidStateError(TriPercolationError, RuntimeError):
    pass


class DomainError(TriPercolationError, ValueError):
    """Input outside the mathematical domain of an analytic quantity."""


class NumericalError(TriPercolationError, ArithmeticError):
    """A root could not be bracketed or refined."""


class ConsistencyError(TriPercolationError, AssertionError):
    """Internal bookkeeping disagrees with itself."""


class ConstructionError(TriPercolationError, RuntimeError):
    pass


class IngestionError(TriPercolationError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NearCriticalWarning(UserWarning):
    """The root scan could not separate w* from 1 because t is too close to T_g."""
