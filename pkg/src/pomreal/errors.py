"""Exception hierarchy and resource-bound defaults."""

from __future__ import annotations

import os

BOUND_ENV = "POMREAL_BOUND"
_FALLBACK_BOUND = 1_000_000


class PomrealError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(PomrealError, ValueError):
    pass


class LabelError(ValidationError):
    pass


class CycleError(ValidationError):
    def __init__(self, cycle):
        self.cycle = tuple(cycle)
        super().__init__("order edges induce a cycle through " + " -> ".join(map(str, self.cycle)))


class DanglingEdge(ValidationError):
    def __init__(self, edge, missing):
        self.edge = tuple(edge)
        self.missing = missing
        super().__init__(f"edge {self.edge!r} names unknown event {missing!r}")


class DuplicateId(ValidationError):
    def __init__(self, event_id):
        self.event_id = event_id
        super().__init__(f"duplicate event id {event_id!r}")


class AmbiguousMatch(PomrealError):
    """An output/input pair cannot be matched unambiguously (pomset is not well-formed)."""

    def __init__(self, message, events=()):
        self.events = tuple(events)
        super().__init__(message)


class SubjectMismatch(PomrealError):
    def __init__(self, participant, event_id, label):
        self.participant = participant
        self.event_id = event_id
        self.label = label
        super().__init__(f"local pomset of {participant!r} contains event {event_id!r} with foreign subject ({label})")


class BoundExceeded(PomrealError):
    """An enumeration would exceed its configured resource bound."""

    def __init__(self, what, bound):
        self.what = what
        self.bound = bound
        super().__init__(f"{what} exceeds the resource bound of {bound}")


class NoTransition(PomrealError):
    pass


class EmptyBuffer(PomrealError):
    pass


class ParseError(PomrealError):
    def __init__(self, message, line=None, column=None, path=None):
        self.line = line
        self.column = column
        self.path = path
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        prefix = ", ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class IntegrityError(PomrealError):
    def __init__(self, message, reference=None):
        self.reference = reference
        super().__init__(message)


class UnsupportedFormat(PomrealError):
    pass


def default_bound() -> int:
    """Resource bound used when callers pass ``bound=None``.

    Read from the ``POMREAL_BOUND`` environment variable on every call.
    """
    raw = os.environ.get(BOUND_ENV)
    if raw is None or not raw.strip():
        return _FALLBACK_BOUND
    try:
        value = int(raw)
    except ValueError:
        raise ValidationError(f"{BOUND_ENV} must be a positive integer, got {raw!r}") from None
    if value <= 0:
        raise ValidationError(f"{BOUND_ENV} must be a positive integer, got {raw!r}")
    return value


def resolve_bound(bound) -> int:
    return default_bound() if bound is None else int(bound)
