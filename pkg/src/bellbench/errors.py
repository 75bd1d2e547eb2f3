"""Exception hierarchy. Each class carries the CLI exit status it maps to."""


class BellbenchError(Exception):
    exit_code = 4


class ValidationError(BellbenchError, ValueError):
    """Bad user input: wrong shape, out-of-range parameter, malformed file."""

    exit_code = 2


class CapacityError(BellbenchError):
    """A matrix or an enumeration would exceed the configured size budget."""

    exit_code = 3


class NumericalError(BellbenchError, ArithmeticError):
    """A numerical routine failed or produced a result violating its contract."""

    exit_code = 4


class ConvergenceError(NumericalError):
    def __init__(self, message, residual=None, sweeps=None):
        super().__init__(message)
        self.residual = residual
        self.sweeps = sweeps
