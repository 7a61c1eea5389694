"""Exception types raised across the package."""


class MottCDWError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(MottCDWError, ValueError):
    """An argument lies outside the domain where a quantity is defined."""


class UnsupportedFillingError(DomainError):
    """The operation is only defined at unit filling."""


class SizeError(MottCDWError, ValueError):
    """The requested lattice or state space is too large to enumerate."""


class NumericError(MottCDWError, ArithmeticError):
    """A numerical routine failed or two independent routes disagree."""

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


class ConsistencyError(NumericError):
    """An algebraic identity that must hold exactly was violated."""
