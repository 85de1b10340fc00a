"""Exception types shared across the package."""


class SpanSleuthError(Exception):
    """Base class for all errors raised by this package."""


# -- corpus ----------------------------------------------------------------

class MalformedRecord(SpanSleuthError):
    """Input line is not a well-formed record object."""


class SchemaViolation(SpanSleuthError):
    """Record object is syntactically valid but violates the schema."""


class OffsetOutOfRange(SpanSleuthError):
    """A character span does not satisfy 0 <= start < end <= text length."""


class FileUnreadable(SpanSleuthError):
    """Corpus path cannot be opened or read."""


# -- span algebra ----------------------------------------------------------

class LengthMismatch(SpanSleuthError):
    """Paired per-character vectors have different lengths."""


# -- decomposition ---------------------------------------------------------

class UnitNotFound(SpanSleuthError):
    """Unit text could not be located in the answer."""


class MalformedTree(SpanSleuthError):
    """Dependency tree has a cycle, bad head index, or wrong root count."""


# -- backends --------------------------------------------------------------

class BackendError(SpanSleuthError):
    """Base class for model-service failures."""


class BackendUnavailable(BackendError):
    """Backend could not be reached after the configured retries."""


class BackendTimeout(BackendUnavailable):
    """Backend did not answer within the configured timeout."""


class BackendProtocolError(BackendError):
    """Backend answered with a body that does not match the wire protocol."""


class EmptyContext(BackendError):
    """Retrieval model returned a blank context document."""


# -- scoring ---------------------------------------------------------------

class EmptyUnit(SpanSleuthError):
    """Confidence requested for a unit with no aligned tokens."""


# -- evaluation ------------------------------------------------------------

class MissingGold(SpanSleuthError):
    """A record needed for scoring has no gold labels."""


class IdMismatch(SpanSleuthError):
    """Prediction ids and gold record ids do not line up."""
