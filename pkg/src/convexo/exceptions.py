"""Exception hierarchy shared across the package."""


class ConvexoError(Exception):
    """Base class for all errors raised by convexo."""


class DimensionError(ConvexoError, ValueError):
    """A point or direction does not match the number of variables."""


class ArgumentError(ConvexoError, ValueError):
    """An argument violates a documented precondition (non-unit direction, odd degree, ...)."""


class UndefinedDegreeError(ConvexoError, ValueError):
    """The operation needs a nonzero polynomial but got the zero polynomial."""


class PreconditionError(ConvexoError, ValueError):
    """A hypothesis of the underlying theorem does not hold for the input."""


class DomainError(ConvexoError, ValueError):
    """The polynomial is not positive at a point where a log-space value is needed.

    The offending point is kept on ``point`` so callers can report a witness.
    """

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class UnsupportedProjectionError(ConvexoError, NotImplementedError):
    """The region variant has no exact projection / line clipping."""


class StallError(ConvexoError, RuntimeError):
    """The line search failed to find a decrease."""


class ConfigurationError(ConvexoError, ValueError):
    """No convexification route is available for the given problem."""
