"""Exception hierarchy shared by all orthofield modules."""


class OrthofieldError(Exception):
    """Base class for every error raised by this package."""


class DomainError(OrthofieldError, ValueError):
    """An argument lies outside the domain of the operation."""


class UnsupportedDimensionError(DomainError):
    pass


class DegenerateCoordinateError(DomainError):
    """A point sits at the origin where polar coordinates are undefined."""


class EmptyDomainError(DomainError):
    pass


class DesignSizeError(DomainError):
    pass


class NumericalError(OrthofieldError, ArithmeticError):
    """A numerical procedure failed; ``diagnostics`` carries the details."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class IndefiniteMatrixError(NumericalError):
    pass


class ConvergenceError(NumericalError):
    def __init__(self, message, best=None, diagnostics=None):
        super().__init__(message, diagnostics)
        self.best = best


class ConfigError(OrthofieldError, ValueError):
    pass
