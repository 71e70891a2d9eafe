"""Report state and the append-only journal that makes it durable.

Every change is one NDJSON record:

    {"v": 1, "seq": 7, "at": "...", "owner": "worker-1@123", "kind": "...", "payload": {...}}

``seq`` strictly increases, ``owner`` names the writer, and the payload
always carries the report code.  Current state is a pure fold of the records
(``apply_record``), which is also how recovery works: replay the longest
valid prefix, drop whatever garbage follows, truncate, carry on.  Records
are fsynced before the in-memory state advances, so an acknowledged write
survives a crash.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from .annotator import Annotation, annotation_from_dict, annotation_to_dict
from .lifecycle import ReportStatus, TERMINAL_STATUSES, IllegalTransition, is_legal_change
from .translator import DEFAULT_LANGUAGES, LANGUAGE_PATTERN, UnsupportedLanguage

SCHEMA_VERSION = 1
JOURNAL_FILENAME = "journal.ndjson"
DEFAULT_MAX_TEXT_BYTES = 1 << 20  # 1 MiB of UTF-8


class StoreError(Exception):
    pass


class UnknownReport(StoreError):
    def __init__(self, code: object):
        super().__init__(f"no report with code {code}")
        self.code = code


class EmptyText(StoreError):
    pass


class TooLarge(StoreError):
    pass


class CorruptJournal(StoreError):
    pass


class RecordKind(str, Enum):
    REPORT_CREATED = "ReportCreated"
    STATUS_CHANGED = "StatusChanged"
    TRANSLATION_RECORDED = "TranslationRecorded"
    ANNOTATIONS_RECORDED = "AnnotationsRecorded"


@dataclass(frozen=True)
class Report:
    code: int
    category: str
    original_language: str
    created_at: datetime
    original_text: str
    status: ReportStatus = ReportStatus.RECEIVED
    translated_text: str | None = None
    annotations: tuple[Annotation, ...] = ()
    failure_reason: str | None = None

    @property
    def processed(self) -> bool:
        return self.status is ReportStatus.DONE

    @property
    def is_terminal(self) -> bool:
        return self.status in TERMINAL_STATUSES

    @property
    def annotation_text(self) -> str:
        """The English text annotations refer to."""
        if self.original_language == "en":
            return self.original_text
        return self.translated_text or ""


@dataclass(frozen=True)
class JournalRecord:
    seq: int
    at: datetime
    owner: str
    kind: RecordKind
    payload: dict


def encode_record(record: JournalRecord) -> bytes:
    doc = {
        "v": SCHEMA_VERSION,
        "seq": record.seq,
        "at": record.at.isoformat(),
        "owner": record.owner,
        "kind": record.kind.value,
        "payload": record.payload,
    }
    return json.dumps(doc, ensure_ascii=False, separators=(",", ":")).encode("utf-8") + b"\n"


def decode_record(line: bytes) -> JournalRecord:
    """Decode one journal line; raises ValueError on anything off-shape."""
    doc = json.loads(line.decode("utf-8"))
    if not isinstance(doc, dict):
        raise ValueError("record is not an object")
    if doc.get("v") != SCHEMA_VERSION:
        raise ValueError(f"unsupported record version {doc.get('v')!r}")
    seq = doc.get("seq")
    if not isinstance(seq, int) or isinstance(seq, bool) or seq < 1:
        raise ValueError("bad seq")
    owner = doc.get("owner")
    if not isinstance(owner, str) or not owner:
        raise ValueError("bad owner")
    try:
        kind = RecordKind(doc.get("kind"))
    except ValueError:
        raise ValueError(f"unknown record kind {doc.get('kind')!r}") from None
    at = datetime.fromisoformat(doc["at"])
    payload = doc.get("payload")
    if not isinstance(payload, dict):
        raise ValueError("bad payload")
    return JournalRecord(seq, at, owner, kind, payload)


def _payload_code(payload: dict) -> int:
    code = payload.get("code")
    if not isinstance(code, int) or isinstance(code, bool) or code < 1:
        raise ValueError(f"bad report code {code!r}")
    return code


def apply_record(reports: dict[int, Report], record: JournalRecord) -> dict[int, Report]:
    """Fold one record into the state, returning a new dict.

    Raises UnknownReport / IllegalTransition / ValueError when the record
    does not fit the current state; callers validate-by-applying before a
    write, and recovery stops its prefix at the first such failure.
    """
    payload = record.payload
    code = _payload_code(payload)
    new = dict(reports)

    if record.kind is RecordKind.REPORT_CREATED:
        if reports and code <= max(reports):
            raise ValueError(f"report code {code} is not increasing")
        new[code] = Report(
            code=code,
            category=str(payload["category"]),
            original_language=str(payload["original_language"]),
            created_at=datetime.fromisoformat(payload["created_at"]),
            original_text=str(payload["original_text"]),
        )
        return new

    report = reports.get(code)
    if report is None:
        raise UnknownReport(code)

    if record.kind is RecordKind.STATUS_CHANGED:
        old = ReportStatus(payload["from"])
        target = ReportStatus(payload["to"])
        if old is not report.status:
            raise IllegalTransition(report.status, f"{old.value}->{target.value}")
        if not is_legal_change(old, target, report.original_language):
            raise IllegalTransition(old, f"{old.value}->{target.value}")
        if target is ReportStatus.FAILED:
            reason = payload.get("reason")
            if not isinstance(reason, str) or not reason:
                raise ValueError("Failed transition without a reason")
            new[code] = replace(report, status=target, failure_reason=reason)
        elif target is ReportStatus.RECEIVED:
            # Reprocess wipes the derived fields; the report starts over.
            new[code] = replace(report, status=target, translated_text=None,
                                annotations=(), failure_reason=None)
        else:
            new[code] = replace(report, status=target)
        return new

    if record.kind is RecordKind.TRANSLATION_RECORDED:
        if report.status is not ReportStatus.TRANSLATING:
            raise IllegalTransition(report.status, "TranslationRecorded")
        new[code] = replace(report, translated_text=str(payload["text"]))
        return new

    if record.kind is RecordKind.ANNOTATIONS_RECORDED:
        if report.status is not ReportStatus.ANNOTATING:
            raise IllegalTransition(report.status, "AnnotationsRecorded")
        docs = payload["annotations"]
        if not isinstance(docs, list):
            raise ValueError("annotations payload is not a list")
        new[code] = replace(report, annotations=tuple(annotation_from_dict(d) for d in docs))
        return new

    raise ValueError(f"unhandled record kind {record.kind}")  # pragma: no cover


@dataclass(frozen=True)
class RecoveredState:
    reports: dict[int, Report]
    records: tuple[JournalRecord, ...]
    last_seq: int
    discarded: int
    valid_bytes: int


def recover(path: Path | str, *, strict: bool = False) -> RecoveredState:
    """Replay a journal, keeping the longest valid prefix.

    Anything after the prefix (undecodable lines, records that don't apply,
    a torn final line) is counted in ``discarded``.  With ``strict`` a dirty
    tail raises CorruptJournal instead.
    """
    path = Path(path)
    try:
        data = path.read_bytes()
    except FileNotFoundError:
        return RecoveredState({}, (), 0, 0, 0)

    reports: dict[int, Report] = {}
    records: list[JournalRecord] = []
    last_seq = 0
    valid_bytes = 0
    discarded = 0
    offset = 0
    failed = False

    while offset < len(data):
        newline = data.find(b"\n", offset)
        if newline == -1:
            # Unterminated tail: a torn write, never valid.
            discarded += 1
            break
        line = data[offset:newline]
        offset = newline + 1
        if failed:
            discarded += 1
            continue
        try:
            record = decode_record(line)
            if record.seq <= last_seq:
                raise ValueError(f"seq {record.seq} does not increase past {last_seq}")
            reports = apply_record(reports, record)
        except (ValueError, KeyError, TypeError, StoreError, IllegalTransition):
            failed = True
            discarded += 1
            continue
        records.append(record)
        last_seq = record.seq
        valid_bytes = offset

    if discarded and strict:
        raise CorruptJournal(f"{path}: {discarded} record(s) after byte {valid_bytes} are invalid")
    return RecoveredState(reports, tuple(records), last_seq, discarded, valid_bytes)


class Store:
    """Journal-backed report store.

    One mutex serializes all writes, so records hit the file in seq order.
    Readers never lock: every mutation swaps in a fresh dict, and whoever
    grabbed the old one keeps a consistent snapshot.
    """

    def __init__(self, path: Path | str, *,
                 languages: Sequence[str] = DEFAULT_LANGUAGES,
                 max_text_bytes: int = DEFAULT_MAX_TEXT_BYTES):
        self._path = Path(path)
        self._path.parent.mkdir(parents=True, exist_ok=True)
        recovered = recover(self._path)
        self.discarded_on_recovery = recovered.discarded
        self._reports = recovered.reports
        self._last_seq = recovered.last_seq
        self._activity: dict[int, datetime] = {}
        for record in recovered.records:
            self._activity[_payload_code(record.payload)] = record.at
        if recovered.discarded:
            with open(self._path, "r+b") as fh:
                fh.truncate(recovered.valid_bytes)
        self._languages = frozenset(languages)
        self._max_text_bytes = max_text_bytes
        self._fh = open(self._path, "ab")
        self._lock = threading.RLock()

    @property
    def path(self) -> Path:
        return self._path

    @property
    def last_seq(self) -> int:
        return self._last_seq

    @property
    def languages(self) -> frozenset[str]:
        return self._languages

    def close(self) -> None:
        self._fh.close()

    def __enter__(self) -> "Store":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # -- writes ---------------------------------------------------------

    def _append(self, owner: str, items: Iterable[tuple[RecordKind, dict]]) -> dict[int, Report]:
        """Validate-by-applying, then write all records with one fsync."""
        with self._lock:
            state = self._reports
            pending: list[JournalRecord] = []
            seq = self._last_seq
            at = datetime.now(timezone.utc)
            for kind, payload in items:
                seq += 1
                record = JournalRecord(seq, at, owner, kind, payload)
                state = apply_record(state, record)
                pending.append(record)
            self._fh.write(b"".join(encode_record(r) for r in pending))
            self._fh.flush()
            os.fsync(self._fh.fileno())
            self._last_seq = seq
            self._reports = state
            for record in pending:
                self._activity[_payload_code(record.payload)] = record.at
            return state

    def create_report(self, category: str, language: str, text: str, *,
                      owner: str = "api") -> Report:
        if not text.strip():
            raise EmptyText("report text is empty")
        if len(text.encode("utf-8")) > self._max_text_bytes:
            raise TooLarge(f"report text exceeds {self._max_text_bytes} bytes")
        if language != "en" and (not LANGUAGE_PATTERN.match(language)
                                 or language not in self._languages):
            raise UnsupportedLanguage(f"language {language!r} is not supported")
        with self._lock:
            code = max(self._reports) + 1 if self._reports else 1
            payload = {
                "code": code,
                "category": category,
                "original_language": language,
                "created_at": datetime.now(timezone.utc).isoformat(),
                "original_text": text,
            }
            state = self._append(owner, [(RecordKind.REPORT_CREATED, payload)])
            return state[code]

    def save_transition(self, code: int, owner: str, kind: RecordKind,
                        payload: dict) -> Report:
        return self.save_transitions(code, owner, [(kind, payload)])

    def save_transitions(self, code: int, owner: str,
                         items: Sequence[tuple[RecordKind, dict]]) -> Report:
        """Append several records for one report atomically (single fsync)."""
        with self._lock:
            if code not in self._reports:
                raise UnknownReport(code)
            state = self._append(owner, [(kind, {"code": code, **payload})
                                         for kind, payload in items])
            return state[code]

    # -- reads ----------------------------------------------------------

    def load_report(self, code: int) -> Report:
        report = self._reports.get(code)
        if report is None:
            raise UnknownReport(code)
        return report

    def list_reports(self) -> list[Report]:
        """Newest first: created_at descending, code breaking ties."""
        return sorted(self._reports.values(),
                      key=lambda r: (r.created_at, r.code), reverse=True)

    def all_reports(self) -> dict[int, Report]:
        return dict(self._reports)

    def last_activity(self, code: int) -> datetime | None:
        return self._activity.get(code)


def record_annotations_payload(annotations: Sequence[Annotation], dropped: int = 0) -> dict:
    return {"annotations": [annotation_to_dict(a) for a in annotations],
            "dropped": dropped}
