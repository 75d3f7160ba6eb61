"""Exception types shared across the package."""


class UnsupportedInputError(ValueError):
    """Raised for inputs outside the supported model, e.g. an even qubit count."""


class CapacityError(ValueError):
    """Raised when a brute-force representation would exceed the size caps."""


class NumericalHealthError(RuntimeError):
    """Raised when two routes to the same quantity disagree beyond tolerance."""


class ConsistencyError(RuntimeError):
    """Raised when an identity that must hold exactly is violated."""
