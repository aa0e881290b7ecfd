"""Exception hierarchy shared across the pipeline modules."""


class ScimapError(Exception):
    """Base class for all pipeline errors."""


class ParseError(ScimapError):
    """Input text could not be parsed."""


class ValidationError(ScimapError):
    """Parsed input violates a schema or value constraint."""


class DuplicateIdError(ScimapError):
    """A record id appears more than once in a corpus."""


class ConfigError(ScimapError):
    """A configuration value is invalid or inconsistent."""


class TransportError(ScimapError):
    """An HTTP request failed after exhausting retries."""


class ProtocolError(ScimapError):
    """A remote response does not match the expected wire shape."""


class FormatError(ScimapError):
    """A binary file does not carry the expected magic or version."""


class CorruptionError(ScimapError):
    """A binary file ends or breaks before its declared content."""

    def __init__(self, message: str, offset: int | None = None):
        super().__init__(message if offset is None else f"{message} (at byte offset {offset})")
        self.offset = offset


class DimensionMismatchError(ScimapError):
    """Vector dimensions disagree between operands."""


class DegenerateDataError(ScimapError):
    """Input data has no usable variation (zero variance, empty set, ...)."""


class MissingArtifactError(ScimapError):
    """A pipeline stage requires an artifact that another stage must produce first."""
