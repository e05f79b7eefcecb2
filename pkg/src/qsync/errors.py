"""Exception hierarchy shared by the library and the CLI."""


class QsyncError(Exception):
    """Base class for all qsync errors."""


class ValidationError(QsyncError, ValueError):
    """Invalid input. ``field`` names the offending parameter when known."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class BudgetError(ValidationError):
    """A step or grid-point budget guard was exceeded."""


class NumericalError(QsyncError, ArithmeticError):
    """A computation produced a non-finite value or broke a physical bound."""
