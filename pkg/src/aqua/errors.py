"""Exception types raised across the package."""


class AquaError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(AquaError, ValueError):
    pass


class SingularMatrix(AquaError, ArithmeticError):
    """Matrix is numerically singular; ``ratio`` is min/max eigenvalue."""

    def __init__(self, message, ratio=None):
        super().__init__(message)
        self.ratio = ratio


class NotPsd(AquaError, ValueError):
    def __init__(self, message, min_eig=None):
        super().__init__(message)
        self.min_eig = min_eig


class SingularL(AquaError, ValueError):
    pass


class EmptyRegion(AquaError, ValueError):
    pass


class UndefinedEfficiency(AquaError, ArithmeticError):
    pass


class Infeasible(AquaError):
    pass


class Unbounded(AquaError):
    def __init__(self, message, ray=None):
        super().__init__(message)
        self.ray = ray


class IndexOutOfRange(AquaError, IndexError):
    pass


class SingularStart(AquaError):
    pass


class NotConverged(AquaError):
    """Iteration cap hit; ``best`` carries the best iterate found."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class EmptyPoint(AquaError, ValueError):
    pass


class InfeasibleStart(AquaError, ValueError):
    pass


class TooFewTrials(AquaError, ValueError):
    pass


class BadParams(AquaError, ValueError):
    pass


class ResourceExhausted(AquaError):
    """Node or time cap reached; ``report`` holds the best result so far."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class IoError(AquaError, OSError):
    pass


class ParseError(AquaError, ValueError):
    """Malformed model, constraint or config file."""
