"""Exception and warning types shared across the package."""


class PinlabError(Exception):
    """Base class for errors raised by pinlab."""


class BudgetExceeded(PinlabError):
    """A computation would exceed its configured work budget."""


class ConvergenceError(PinlabError):
    """An iterative solver did not converge within its iteration budget."""


class ConfigError(PinlabError, ValueError):
    """Invalid run configuration; ``field`` names the offending key."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class CancellationWarning(UserWarning):
    """A complement was obtained by subtracting nearly equal quantities."""
