"""Exception hierarchy for delay-Doppler simulation."""


class DDError(Exception):
    """Base class for all library errors."""


class DimensionError(DDError, ValueError):
    """Array length or shape does not match the frame geometry."""


class CoverageError(DDError):
    """A signal or sampling axis does not cover the required period."""


class QuantizationError(DDError, ValueError):
    """A delay is not an integer multiple of the sample period."""


class UnsupportedWindowError(DDError):
    """The requested operation is not defined for this window kind."""


class CrystallizationError(DDError):
    """Channel spreads violate the crystallization condition."""


class ChannelError(DDError):
    """Invalid channel parameters or non-quasi-periodic channel input."""


class InvariantError(DDError):
    """A numerical self-check exceeded its tolerance."""


class ConfigError(DDError):
    """Experiment configuration failed validation."""

    def __init__(self, messages: list[str]) -> None:
        """Initialize with the list of validation messages.

        Args:
            messages: Human-readable validation messages.
        """
        self.messages = list(messages)
        super().__init__("; ".join(self.messages))
