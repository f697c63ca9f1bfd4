"""Exception hierarchy shared by every module."""


class CheblcuError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(CheblcuError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class CapabilityError(CheblcuError):
    """A request exceeds a configured size or precision limit."""


class NumericalError(CheblcuError, ArithmeticError):
    """A numerical routine failed or produced an unusable result."""


class DegenerateOutcomeError(NumericalError):
    """The post-selected output vector is too small to normalise.

    The norm of the offending vector is kept on ``norm`` for diagnostics.
    """

    def __init__(self, message: str, norm: float, stage: int | None = None):
        super().__init__(message)
        self.norm = norm
        self.stage = stage


class BoundViolationError(CheblcuError):
    """A checked bound failed on a run that otherwise completed."""
