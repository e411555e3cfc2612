"""Exception types raised across the package."""


class AadError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(AadError, ValueError):
    pass


class NotPositiveDefinite(AadError, ValueError):
    pass


class SegmentTooShort(AadError, ValueError):
    pass


class MalformedFile(AadError, ValueError):
    pass


class InvalidProbability(AadError, ValueError):
    pass


class InvalidConfig(AadError, ValueError):
    pass


class PlanInfeasible(AadError, ValueError):
    pass


class DegenerateFitWarning(UserWarning):
    """All correlation scores are identical; both Gaussians collapse to the floor."""
