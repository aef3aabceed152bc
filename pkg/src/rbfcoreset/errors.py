"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Malformed or non-finite input, bad dimensions, bad parameters."""


class PreconditionError(ValueError):
    """Input is well formed but violates a hypothesis of the bounds (e.g. a point outside the unit ball)."""


class UnsupportedDimensionError(InvalidInputError):
    pass


class DegenerateError(ArithmeticError):
    """A normalising denominator vanished."""
