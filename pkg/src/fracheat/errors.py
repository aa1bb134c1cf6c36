"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ToleranceError(ArithmeticError):
    """A quadrature did not reach the requested tolerance.

    The best available value and its error estimate are kept so callers can
    decide whether the result is still usable.
    """

    def __init__(self, message, value=None, error=None):
        super().__init__(message)
        self.value = value
        self.error = error


class RegionError(DomainError):
    """Parameters fall outside the region a construction requires."""


class UnsupportedVariantError(TypeError):
    """An operation is not available for this kind of field."""
