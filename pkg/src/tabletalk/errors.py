"""Exception types shared across modules.

The gateway maps these onto HTTP statuses: ValidationFailure -> 422,
NotFound -> 404, Conflict -> 409, BadRequest -> 400.
"""

from __future__ import annotations


class PlatformError(Exception):
    """Base class for all domain errors."""


class ValidationFailure(PlatformError):
    """A record failed invariant checks; carries the violation list."""

    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = violations


class NotFound(PlatformError):
    """Unknown id: profile, session, dish, restaurant, fence, log position."""


class Conflict(PlatformError):
    """State forbids the mutation (dangling refs, fallback relabeling, ...)."""


class BadRequest(PlatformError):
    """Malformed input: empty inquiry, inverted window, bad corpus line."""


class CorruptCatalog(PlatformError):
    """A catalog snapshot contains dangling references."""


class NonMonotonicTrace(PlatformError):
    """Walk trace timestamps decrease."""


class PhaseRegression(Conflict):
    """Attempted backwards phase transition on a chat session."""


class BadTemplate(PlatformError):
    """A response template contains an unknown placeholder."""


class InsufficientSuggestions(PlatformError):
    """Fewer than three suggestible intents are configured."""


class EmptyInquiry(BadRequest):
    """Chat message with empty user text."""


class EmptyWindow(BadRequest):
    """Analytics window with from > to."""


class FallbackImmutable(Conflict):
    """A fallback outcome cannot be relabeled as a non-fallback outcome."""


class LogCorrupt(PlatformError):
    """An on-disk NDJSON log has a malformed record; carries its byte offset."""

    def __init__(self, path: str, offset: int, reason: str = "malformed record"):
        super().__init__(f"{path}: {reason} at byte offset {offset}")
        self.path = path
        self.offset = offset
