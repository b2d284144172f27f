"""Exception types shared across the package."""


class BoxValidationError(ValueError):
    """A bounding box violates its invariants (names the offending field)."""


class ConfigError(ValueError):
    """A configuration value is out of its allowed range."""


class DatasetValidationError(ValueError):
    """A benchmark record or layout violates the dataset schema."""


class CapacityError(DatasetValidationError):
    """A concatenation layout exceeds the configured canvas limit."""


class JudgeProtocolError(Exception):
    """The judge reply does not follow the expected verdict format.

    Carries the raw reply text for audit.
    """

    def __init__(self, reason: str, raw: str = ""):
        super().__init__(reason)
        self.reason = reason
        self.raw = raw


class JudgeTransportError(Exception):
    """The judge endpoint could not be reached or returned a transport-level failure."""
