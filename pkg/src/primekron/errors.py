"""Exception types raised across the package."""


class InvalidArgumentError(ValueError):
    pass


class DimensionMismatchError(ValueError):
    pass


class IndivisibleError(ValueError):
    """A block size does not divide the matrix dimension along ``axis``."""

    def __init__(self, message, axis=None):
        super().__init__(message)
        self.axis = axis


class NotHermitianError(ValueError):
    pass


class NotCommutingError(ValueError):
    """Two members of a family fail the commutativity test.

    ``pair`` holds the (0-based) indices of the first offending pair in
    lexicographic order.
    """

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class DegeneracyError(RuntimeError):
    pass


class NoPairFoundError(RuntimeError):
    pass


class PrimeOrderError(ValueError):
    pass


class UnsupportedClassError(ValueError):
    pass


class TermExplosionError(RuntimeError):
    pass
