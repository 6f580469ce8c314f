"""Exception hierarchy shared by the coder, simulator and CLI."""


class CRTNCError(Exception):
    """Base class for every error raised by this package."""


class UndefinedGcdError(CRTNCError, ValueError):
    pass


class InsufficientPrimesError(CRTNCError, ValueError):
    def __init__(self, requested: int, bit_length: int, available: int):
        self.requested = requested
        self.bit_length = bit_length
        self.available = available
        super().__init__(
            f"requested {requested} distinct {bit_length}-bit primes, "
            f"but only {available} exist"
        )


class UnsupportedSizeError(CRTNCError, ValueError):
    pass


class MessageTooLargeError(CRTNCError, ValueError):
    pass


class CorruptionError(CRTNCError):
    """Packets reaching a node (or receiver) carry contradictory congruences."""


class ConfigurationError(CRTNCError, ValueError):
    pass


class WireFormatError(CRTNCError, ValueError):
    pass


class InvalidFieldError(CRTNCError, ValueError):
    pass
