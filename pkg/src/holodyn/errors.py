"""Exception types shared across the package."""


class HolodynError(Exception):
    """Base class for errors raised by holodyn."""


class DimensionMismatch(HolodynError, ValueError):
    pass


class TruncationError(HolodynError):
    """An operation would return coefficients carrying no exact information."""


class PreconditionError(HolodynError, ValueError):
    """A documented precondition of an operation is violated."""


class TrivialOperatorError(PreconditionError):
    """The operator is a multiple of the identity."""


class ConvergenceError(HolodynError, RuntimeError):
    """Newton iteration or continuation failed."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class CriticalPointError(ConvergenceError):
    """The symbol derivative along the continuation line vanished at a node."""
