"""Exception hierarchy.

Every validation failure raised by the library derives from ``HeliocotError``
so the CLI can map it to exit code 1; file-system problems surface as plain
``OSError`` and map to exit code 2.
"""


class HeliocotError(ValueError):
    """Base class for input/validation errors."""


class ValidityError(HeliocotError):
    """Input outside the validity window of an algorithm."""


class OutOfFrameError(HeliocotError):
    """A projected point falls outside the image bounds."""


class EmptyRegionError(HeliocotError):
    """An averaging region contains no pixels."""


class MetadataError(HeliocotError):
    """A required exposure/timestamp field is absent or invalid."""

    def __init__(self, field, detail=""):
        self.field = field
        msg = f"missing or invalid image metadata: {field}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class InsufficientDataError(HeliocotError):
    """Too few samples for the requested computation."""


class SingularFitError(HeliocotError):
    """Regressor has zero variance."""


class DegenerateRangeError(HeliocotError):
    """Series with max == min cannot be min-max normalized."""


class DegenerateVarianceError(HeliocotError):
    """Constant series passed to a correlation."""


class ShapeError(HeliocotError):
    """Paired series of different lengths."""


class ParseError(HeliocotError):
    """Malformed input row."""

    def __init__(self, msg, line=None):
        self.line = line
        if line is not None:
            msg = f"line {line}: {msg}"
        super().__init__(msg)


class OrderingError(HeliocotError):
    """Timestamps not in the required order."""


class RangeError(HeliocotError):
    """Value outside its physical range."""


class EmptyGridError(HeliocotError):
    """COT grid with no valid cells."""


class ConfigError(HeliocotError):
    """Invalid or inconsistent configuration."""
