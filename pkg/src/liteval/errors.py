"""Exception types shared across the package.

Everything raised deliberately by liteval derives from LitevalError, so
callers can catch one base class at the boundary. Missing input files
raise the builtin FileNotFoundError as-is.
"""


class LitevalError(Exception):
    """Base class for all errors raised by this package."""


class InvalidEncodingError(LitevalError):
    """Input file is not valid UTF-8."""


class EmptyDocumentError(LitevalError):
    """A document side contains no non-blank paragraphs."""


class BackendError(LitevalError):
    """Base class for completion-backend failures."""


class AuthError(BackendError):
    """Provider rejected the credentials (HTTP 401/403). Never retried."""


class RateLimitedError(BackendError):
    """Provider kept answering 429 until the retry budget ran out."""


class ProviderError(BackendError):
    """Provider returned a malformed or otherwise unusable response."""


class ProviderTimeout(BackendError):
    """Request timed out on every attempt."""


class UnparseableVerdict(LitevalError):
    """Model response did not contain a usable JSON verdict."""


class InvalidWeightsError(LitevalError):
    """Score weights are negative or do not sum to 1."""


class ScoreOutOfRangeError(LitevalError):
    """A component score fell outside [0, 1]."""


class MissingAgentReportError(LitevalError):
    """A report required by the coordinator was not supplied."""


class DuplicateAgentReportError(LitevalError):
    """Two reports were supplied for the same agent."""


class EmptyCorpusError(LitevalError):
    """Metric invoked with zero segments."""


class LengthMismatchError(LitevalError):
    """Paired sequences differ in length, or are too short to use."""


class EmptyReferenceError(LitevalError):
    """Reference segment has no tokens."""


class DegenerateSeriesError(LitevalError):
    """Correlation input is constant, so the coefficient is undefined."""
