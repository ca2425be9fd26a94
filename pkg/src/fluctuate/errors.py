"""Exception hierarchy shared by all modules.

The CLI maps :class:`ValidationError` and :class:`DomainError` to exit
code 2 and :class:`NumericError` to exit code 3.
"""


class FluctuateError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(FluctuateError, ValueError):
    """Model parameters violate one or more constraints.

    Attributes
    ----------
    violations : list of str
        Every violated constraint, in the order they were checked.
    """

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class DomainError(FluctuateError, ValueError):
    """A function was evaluated outside its domain (pole, branch cut, ...)."""


class UnsupportedRegimeError(DomainError):
    """An approximation was requested for parameters it does not cover."""


class NumericError(FluctuateError, ArithmeticError):
    """A computation could not reach the requested accuracy."""

    def __init__(self, message, **diagnostics):
        self.diagnostics = diagnostics
        if diagnostics:
            extra = ", ".join(f"{k}={v!r}" for k, v in diagnostics.items())
            message = f"{message} ({extra})"
        super().__init__(message)


class ConvergenceError(NumericError):
    """A series did not converge within its iteration cap."""
