"""Exception taxonomy shared across the package.

Every error carries a stable machine-readable ``code`` so the HTTP layer
can serialize failures without string-matching messages.
"""

from __future__ import annotations


class PrTitleError(Exception):
    """Base class for all domain errors."""

    code = "internal"


class InvalidRequestError(PrTitleError):
    """Request body is not JSON or does not have the documented shape."""

    code = "invalid_request"


class MalformedUrlError(PrTitleError):
    """URL is not a recognizable GitHub compare / pull / issue link."""

    code = "malformed_url"


class NotFoundError(PrTitleError):
    """Upstream returned 404 for the requested resource."""

    code = "not_found"


class RateLimitedError(PrTitleError):
    """Upstream returned 403/429; ``retry_after`` holds the hint in seconds, if given."""

    code = "rate_limited"

    def __init__(self, message: str, retry_after: float | None = None):
        super().__init__(message)
        self.retry_after = retry_after


class UpstreamError(PrTitleError):
    """Upstream returned a 5xx status (after one retry)."""

    code = "upstream"


class NetworkError(PrTitleError):
    """Connection-level failure talking to an upstream service."""

    code = "network"


class DecodeError(PrTitleError):
    """Payload did not match the expected shape."""

    code = "decode_error"


class EmptySourceError(PrTitleError):
    """No usable text was left after assembling the source sequence."""

    code = "empty_source"


class BackendUnavailableError(PrTitleError):
    """Generation backend timed out or refused the connection."""

    code = "backend_unavailable"


class BackendError(PrTitleError):
    """Generation backend answered with a non-200 status or an invalid payload."""

    code = "backend_error"


class EmptyCorpusError(PrTitleError):
    """A corpus-level operation received no records."""

    code = "empty_corpus"


class EmptySplitError(PrTitleError):
    """The evaluation split holds no scorable records."""

    code = "empty_split"
