"""Exception hierarchy shared by all modules."""


class LadderError(Exception):
    """Base class for every error raised by this package."""


class NoSignChange(LadderError, ValueError):
    pass


class DomainError(LadderError, ValueError):
    pass


class UnsupportedFamily(LadderError, ValueError):
    pass


class PreconditionViolated(LadderError, ValueError):
    pass


class NumericalFailure(LadderError, RuntimeError):
    """Raised when a computation cannot be certified numerically."""


class GridTooCoarse(NumericalFailure):
    pass


class NoBoundState(NumericalFailure):
    pass


class NonPositiveGroundState(NumericalFailure):
    pass


class LadderBreakdown(NumericalFailure):
    pass
