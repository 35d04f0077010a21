"""Exception types shared across the package."""


class GalmaxError(Exception):
    """Base class for package errors."""


class InvalidInputError(GalmaxError, ValueError):
    """Arguments violate a documented precondition."""


class ResourceCapError(GalmaxError):
    """Requested computation exceeds a configured materialization cap."""


class SingularCurveError(GalmaxError):
    """Weierstrass coefficients define a singular curve (discriminant zero)."""

    def __init__(self, message: str = "singular curve: discriminant is zero", delta=0):
        super().__init__(message)
        self.delta = delta


class BadReductionError(GalmaxError):
    """Curve or field element does not reduce well at the given prime."""
