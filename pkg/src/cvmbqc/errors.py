"""Exception types shared across the package."""


class MeasurementDegenerateError(ValueError):
    """A basis setting makes the measured quadratures fail to determine the
    anti-squeezed cluster quadratures (the elimination system is singular)."""


class DegenerateConditioningError(ValueError):
    """Conditioning on a quadrature whose variance is numerically zero."""


class CacheMissError(LookupError):
    """A required optimized-basis cache entry is missing."""
