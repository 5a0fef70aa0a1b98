"""Exception hierarchy.

Every error raised by the package derives from :class:`TumorModelError`, and
also from the closest builtin so callers can catch ``ValueError`` and friends.
"""


class TumorModelError(Exception):
    """Base class for all package errors."""


class InvalidParameter(TumorModelError, ValueError):
    pass


class NonPositiveArgument(TumorModelError, ValueError):
    pass


class ArgumentOverflow(TumorModelError, OverflowError):
    pass


class RadiusOutOfRange(TumorModelError, ValueError):
    pass


class NonPositiveState(TumorModelError, ValueError):
    """A delayed state reached zero or below; the cube root is meaningless."""


class BracketNotFound(TumorModelError, RuntimeError):
    pass


class InconsistentState(TumorModelError, ValueError):
    pass


class CoefficientOrderViolated(TumorModelError, ValueError):
    pass


class InvariantViolation(TumorModelError, AssertionError):
    """A proven postcondition failed. Indicates a bug, not bad input."""


class InvalidStepCount(TumorModelError, ValueError):
    pass


class HistoryDomainViolation(TumorModelError, ValueError):
    pass


class TimeOutOfRange(TumorModelError, ValueError):
    pass


class HypothesisViolated(TumorModelError, ValueError):
    pass


class NoCrossing(TumorModelError, RuntimeError):
    pass


class ResidualTooLarge(TumorModelError, RuntimeError):
    pass


class HorizonTooShort(TumorModelError, ValueError):
    pass


class BracketInvalid(TumorModelError, ValueError):
    pass


class EmptyTrajectory(TumorModelError, ValueError):
    pass


class ConfigParseError(TumorModelError, ValueError):
    pass
