"""Exception types shared across the library."""


class RollgeoError(Exception):
    """Base class for all library errors."""


class ChartDomainError(RollgeoError):
    """A point lies outside the domain of a coordinate chart."""


class SingularMetricError(RollgeoError):
    """Metric coefficients at a point are not symmetric positive definite."""


class FrameError(RollgeoError):
    """A frame is too far from the orthonormal set to be used or corrected."""


class DimensionError(RollgeoError):
    """An operation was called with data of an incompatible dimension."""


class HorizontalityError(RollgeoError):
    """A curve supposed to be horizontal fails the compatibility check."""
