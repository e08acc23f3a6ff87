"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Raised when inputs violate a documented precondition."""


class NumericalError(ArithmeticError):
    """Raised when a computation fails or leaves its validity regime."""


class AdiabaticEliminationError(NumericalError):
    """A detuning denominator is too close to zero for adiabatic elimination."""
