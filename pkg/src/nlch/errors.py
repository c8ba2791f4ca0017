"""Exception hierarchy shared by the library and the CLI."""


class NLCHError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(NLCHError, ValueError):
    """Invalid parameters: bad domain, step above a stability guard, malformed config."""


class DomainMismatchError(NLCHError, ValueError):
    """Two fields (or a field and an operator) live on different grids."""


class NumericalAbort(NLCHError, RuntimeError):
    """A time integration produced non-finite values."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class BudgetError(NLCHError, ValueError):
    """An oracle was asked to exceed its size budget."""
