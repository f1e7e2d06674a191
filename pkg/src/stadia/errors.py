class StadiaError(Exception):
    """Base class for package errors."""


class InvalidInput(StadiaError, ValueError):
    """An argument violates the operation's preconditions."""


class OutOfGate(InvalidInput):
    """Box area fraction is outside the range the depth law is evaluated for."""


class MalformedDatagram(StadiaError, ValueError):
    """A received payload does not match the DET wire format."""
