"""
Error hierarchy shared by every ktree-search package.

Library code raises these; the CLI turns them into exit statuses and the
scoring service turns request problems into HTTP 400 responses.
"""
from typing import Optional


class KTreeError(Exception):
    """Base class for all ktree-search errors."""


class InvalidInputError(KTreeError, ValueError):
    """Raised when an argument violates an operation's preconditions."""


class DomainError(KTreeError, ValueError):
    """Raised when a value lies outside the domain of a math operation."""


class FormatError(KTreeError):
    """Raised when a file does not conform to its on-disk format."""

    def __init__(self, message: str, offset: Optional[int] = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at offset {offset})"
        super().__init__(message)


class ConsistencyError(KTreeError):
    """Raised when two individually valid artifacts disagree."""


class ConfigurationError(KTreeError):
    """Raised for invalid run configuration or unusable index setup."""


class UnsupportedMetricError(KTreeError):
    """Raised when an index is asked for a metric it cannot serve."""


class ScorerError(KTreeError):
    """Base class for pair scorer failures."""


class RetryableScorerError(ScorerError):
    """Transient scorer failure (timeout, connection reset)."""


class ProtocolError(ScorerError):
    """Scorer answered with a non-2xx status or an unreadable body."""

    def __init__(self, message: str, payload: str = ""):
        self.payload = payload[:200]
        if self.payload:
            message = f"{message}: {self.payload!r}"
        super().__init__(message)


class ContractViolationError(ScorerError):
    """Scorer answered, but the answer breaks the scoring contract."""
