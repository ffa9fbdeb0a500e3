"""Exception types shared across the package."""


class CarnotError(ValueError):
    """Base class for all validation and precondition failures."""


class InvalidParameterError(CarnotError):
    pass


class DimensionMismatchError(CarnotError):
    pass


class MassMismatchError(CarnotError):
    pass


class PreconditionError(CarnotError):
    """Raised when an operation is called outside its domain of validity."""
