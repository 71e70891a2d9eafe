"""Report lifecycle state machine.

``step`` is the single source of truth for which event moves which status
where; the journal records the resulting edges and ``is_legal_change``
re-checks them on replay.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Union

from .annotator import Annotation


class ReportStatus(str, Enum):
    RECEIVED = "Received"
    TRANSLATING = "Translating"
    TRANSLATED = "Translated"
    ANNOTATING = "Annotating"
    DONE = "Done"
    FAILED = "Failed"


TERMINAL_STATUSES = frozenset({ReportStatus.DONE, ReportStatus.FAILED})


@dataclass(frozen=True)
class Start:
    pass


@dataclass(frozen=True)
class TranslationSucceeded:
    text: str


@dataclass(frozen=True)
class TranslationFailed:
    reason: str


@dataclass(frozen=True)
class AnnotationSucceeded:
    annotations: tuple[Annotation, ...]


@dataclass(frozen=True)
class AnnotationFailed:
    reason: str


@dataclass(frozen=True)
class Reprocess:
    pass


TransitionEvent = Union[Start, TranslationSucceeded, TranslationFailed,
                        AnnotationSucceeded, AnnotationFailed, Reprocess]


class IllegalTransition(Exception):
    def __init__(self, status: ReportStatus, event: TransitionEvent | str):
        name = event if isinstance(event, str) else type(event).__name__
        super().__init__(f"{name} is not legal in status {status.value}")
        self.status = status
        self.event = event


def step(status: ReportStatus, language: str, event: TransitionEvent) -> ReportStatus:
    """Return the status an event moves a report to, or raise IllegalTransition.

    English reports skip translation: Start takes them straight from
    Received to Annotating.
    """
    S = ReportStatus
    if isinstance(event, Start):
        if status is S.RECEIVED:
            return S.ANNOTATING if language == "en" else S.TRANSLATING
        if status is S.TRANSLATED:
            return S.ANNOTATING
    elif isinstance(event, TranslationSucceeded):
        if status is S.TRANSLATING:
            return S.TRANSLATED
    elif isinstance(event, TranslationFailed):
        if status is S.TRANSLATING:
            return S.FAILED
    elif isinstance(event, AnnotationSucceeded):
        if status is S.ANNOTATING:
            return S.DONE
    elif isinstance(event, AnnotationFailed):
        if status is S.ANNOTATING:
            return S.FAILED
    elif isinstance(event, Reprocess):
        if status is S.FAILED:
            return S.RECEIVED
    raise IllegalTransition(status, event)


def is_legal_change(old: ReportStatus, new: ReportStatus, language: str) -> bool:
    """Edge check used when validating and replaying journal records."""
    S = ReportStatus
    if old is S.RECEIVED:
        return new is (S.ANNOTATING if language == "en" else S.TRANSLATING)
    if old is S.TRANSLATING:
        return new in (S.TRANSLATED, S.FAILED)
    if old is S.TRANSLATED:
        return new is S.ANNOTATING
    if old is S.ANNOTATING:
        return new in (S.DONE, S.FAILED)
    if old is S.FAILED:
        return new is S.RECEIVED
    return False  # Done has no outgoing edges
