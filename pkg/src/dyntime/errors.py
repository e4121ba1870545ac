"""Exception hierarchy shared by all dyntime modules."""


class DyntimeError(Exception):
    """Base class for every error raised by this package."""


class NotHermitian(DyntimeError, ValueError):
    pass


class NumericalFailure(DyntimeError, ArithmeticError):
    pass


class DimensionMismatch(DyntimeError, ValueError):
    pass


class NotInReducedSpace(DyntimeError, ValueError):
    """The state is a fixed point of the flow (or too close to one)."""


class InvalidChart(DyntimeError, ValueError):
    pass


class DegenerateFrequency(DyntimeError, ValueError):
    """Requested time function rotates at zero rate."""


class InsufficientSamples(DyntimeError, RuntimeError):
    pass


class ParseError(DyntimeError, ValueError):
    """Configuration error tagged with the offending field path."""

    def __init__(self, path, message):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}" if path else message)
