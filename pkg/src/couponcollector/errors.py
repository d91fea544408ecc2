"""Exception types shared across the package."""


class CouponCollectorError(Exception):
    """Base class for all errors raised by this package."""


class InputError(CouponCollectorError, ValueError):
    """A parameter, probability vector, or input file failed validation."""


class CapacityError(CouponCollectorError):
    """An exact computation was requested beyond the configured size cap."""


class DivergenceError(CouponCollectorError):
    """The collection cannot be completed, so its expected time is infinite.

    Carries the offending subset of types as a bitmask when known.
    """

    def __init__(self, message: str, subset_mask: int | None = None):
        super().__init__(message)
        self.subset_mask = subset_mask
