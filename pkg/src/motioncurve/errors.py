"""Exception hierarchy shared by every module."""


class MotionCurveError(ValueError):
    """Base class for all errors raised by motioncurve."""


class DomainError(MotionCurveError):
    """An argument lies outside the domain of the operation."""


class InsufficientDataError(MotionCurveError):
    """Too few frames / anchors / observations to carry out the operation."""


class SingularSystemError(MotionCurveError):
    """A linear system turned out to be singular during elimination."""
