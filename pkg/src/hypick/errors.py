"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation (e.g. |z| >= 1)."""


class DistinctnessError(ValueError):
    """Two points that must be distinct coincide within the coincidence tolerance."""

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class ShapeError(ValueError):
    """A matrix argument has the wrong shape or is not Hermitian."""


class InterpolationError(ValueError):
    """A map does not reproduce the prescribed targets."""

    def __init__(self, message, index=None, residual=None):
        super().__init__(message)
        self.index = index
        self.residual = residual


class DegenerateLevel(ArithmeticError):
    """A difference quotient hit a unimodular value inside the disc."""


class BoundaryCase(ArithmeticError):
    """A diagonal quotient is unimodular, so the Schur recursion cannot continue."""

    def __init__(self, message, level=None):
        super().__init__(message)
        self.level = level


class PrecisionLoss(ArithmeticError):
    """The direct quotient and its limit form disagree beyond what analyticity allows."""
