"""Translation backends: a deterministic in-process mock and a remote adapter.

Both speak the same submit/poll contract.  ``submit`` returns a pending job,
``poll`` returns a snapshot of that job, and once a snapshot is terminal
every later poll returns the identical answer.
"""

from __future__ import annotations

import re
import threading
import time
import uuid
from dataclasses import dataclass, replace
from datetime import datetime, timedelta, timezone
from enum import Enum
from typing import Sequence

import httpx

LANGUAGE_PATTERN = re.compile(r"[a-z]{2}\Z")

DEFAULT_LANGUAGES: tuple[str, ...] = ("pt", "es", "fr", "it", "de")


class TranslationError(Exception):
    pass


class UnsupportedLanguage(TranslationError):
    pass


class BackendUnavailable(TranslationError):
    pass


class MissingCredentials(TranslationError):
    pass


class UnknownJob(TranslationError):
    pass


class JobState(str, Enum):
    PENDING = "pending"
    RUNNING = "running"
    SUCCEEDED = "succeeded"
    FAILED = "failed"


TERMINAL_JOB_STATES = frozenset({JobState.SUCCEEDED, JobState.FAILED})


@dataclass(frozen=True)
class TranslationRequest:
    text: str
    source_lang: str
    target_lang: str = "en"


@dataclass(frozen=True)
class TranslationJob:
    job_id: str
    request: TranslationRequest
    state: JobState
    submitted_at: datetime
    completed_at: datetime | None = None
    result_text: str | None = None
    failure_reason: str | None = None

    @property
    def is_terminal(self) -> bool:
        return self.state in TERMINAL_JOB_STATES


def _check_request(request: TranslationRequest, languages: frozenset[str]) -> None:
    if request.target_lang != "en":
        raise UnsupportedLanguage(f"can only translate into en, not {request.target_lang!r}")
    src = request.source_lang
    if src == "en" or not LANGUAGE_PATTERN.match(src) or src not in languages:
        raise UnsupportedLanguage(f"source language {src!r} is not supported")
    if not request.text.strip():
        raise ValueError("nothing to translate")


def mock_translate(phrase_table: Sequence[tuple[str, str]], text: str) -> str:
    """Substitute phrase-table entries case-insensitively, left to right.

    Longer sources win over shorter ones; among equal lengths the earlier
    table entry wins.  Replacements never overlap.
    """
    entries = sorted(((src, src.casefold(), dst) for src, dst in phrase_table),
                     key=lambda e: -len(e[0]))
    if any(not src for src, _, _ in entries):
        raise ValueError("phrase table sources must be non-empty")
    out: list[str] = []
    i = 0
    n = len(text)
    while i < n:
        for src, folded, dst in entries:
            w = len(src)
            if i + w <= n and text[i:i + w].casefold() == folded:
                out.append(dst)
                i += w
                break
        else:
            out.append(text[i])
            i += 1
    return "".join(out)


# Demo-grade phrase table for the mock backend.  Enough pt/es/fr/it/de
# radiology vocabulary to produce English the sample lexicon can annotate.
DEFAULT_PHRASE_TABLE: tuple[tuple[str, str], ...] = (
    # pt
    ("radiografia do tórax", "chest radiograph"),
    ("ressonância magnética", "MRI"),
    ("tomografia computadorizada", "CT scan"),
    ("derrame pleural", "pleural effusion"),
    ("nódulo pulmonar", "pulmonary nodule"),
    ("ultrassonografia", "ultrasound"),
    ("ecografia", "ultrasound"),
    ("sem alterações", "unremarkable"),
    ("cardiomegalia", "cardiomegaly"),
    ("pneumotórax", "pneumothorax"),
    ("consolidação", "consolidation"),
    ("pulmão", "lung"),
    ("coração", "heart"),
    ("fratura", "fracture"),
    ("fígado", "liver"),
    ("tórax", "chest"),
    ("mostra", "shows"),
    ("direito", "right"),
    ("esquerdo", "left"),
    # es
    ("radiografía de tórax", "chest radiograph"),
    ("resonancia magnética", "MRI"),
    ("tomografía computarizada", "CT scan"),
    ("nódulo pulmonar", "pulmonary nodule"),
    ("neumonía", "pneumonia"),
    ("neumotórax", "pneumothorax"),
    ("muestra", "shows"),
    ("hígado", "liver"),
    ("derecho", "right"),
    ("izquierdo", "left"),
    # fr
    ("radiographie thoracique", "chest radiograph"),
    ("épanchement pleural", "pleural effusion"),
    ("nodule pulmonaire", "pulmonary nodule"),
    ("échographie", "ultrasound"),
    ("pneumonie", "pneumonia"),
    ("poumon", "lung"),
    ("cœur", "heart"),
    ("montre", "shows"),
    ("foie", "liver"),
    # it
    ("risonanza magnetica", "MRI"),
    ("versamento pleurico", "pleural effusion"),
    ("nodulo polmonare", "pulmonary nodule"),
    ("polmonite", "pneumonia"),
    ("frattura", "fracture"),
    ("polmone", "lung"),
    ("cuore", "heart"),
    ("fegato", "liver"),
    # de
    ("röntgenaufnahme des thorax", "chest radiograph"),
    ("pleuraerguss", "pleural effusion"),
    ("lungenrundherd", "pulmonary nodule"),
    ("lungenentzündung", "pneumonia"),
    ("zeigt", "shows"),
    ("lunge", "lung"),
    ("herz", "heart"),
    ("leber", "liver"),
)


@dataclass
class _MockJob:
    job: TranslationJob  # the pending snapshot from submit
    ready_at: float  # monotonic time at which the job turns terminal
    result_text: str | None
    failure_reason: str | None
    terminal: TranslationJob | None = None


class MockTranslationBackend:
    """Deterministic offline translator.

    Translates by phrase-table substitution and holds every job in the
    running state for ``latency_secs`` of wall time, to mimic an external
    service that takes a while.
    """

    name = "mock"

    def __init__(self, phrase_table: Sequence[tuple[str, str]] = DEFAULT_PHRASE_TABLE, *,
                 latency_secs: float = 0.0,
                 languages: Sequence[str] = DEFAULT_LANGUAGES,
                 fail_with: str | None = None):
        self._table = list(phrase_table)
        self._latency = max(0.0, float(latency_secs))
        self._languages = frozenset(languages)
        self._fail_with = fail_with
        self._jobs: dict[str, _MockJob] = {}
        self._lock = threading.Lock()

    @property
    def languages(self) -> frozenset[str]:
        return self._languages

    @property
    def submitted_count(self) -> int:
        return len(self._jobs)

    def submit(self, request: TranslationRequest) -> TranslationJob:
        _check_request(request, self._languages)
        job = TranslationJob(uuid.uuid4().hex, request, JobState.PENDING,
                             submitted_at=datetime.now(timezone.utc))
        # The outcome is fixed at submit time; latency only delays its release.
        entry = _MockJob(
            job=job,
            ready_at=time.monotonic() + self._latency,
            result_text=None if self._fail_with else mock_translate(self._table, request.text),
            failure_reason=self._fail_with,
        )
        with self._lock:
            self._jobs[job.job_id] = entry
        return job

    def poll(self, job_id: str) -> TranslationJob:
        with self._lock:
            entry = self._jobs.get(job_id)
            if entry is None:
                raise UnknownJob(job_id)
            if entry.terminal is not None:
                return entry.terminal
            if time.monotonic() < entry.ready_at:
                return replace(entry.job, state=JobState.RUNNING)
            completed = entry.job.submitted_at + timedelta(seconds=self._latency)
            if entry.failure_reason is not None:
                entry.terminal = replace(entry.job, state=JobState.FAILED,
                                         completed_at=completed,
                                         failure_reason=entry.failure_reason)
            else:
                entry.terminal = replace(entry.job, state=JobState.SUCCEEDED,
                                         completed_at=completed,
                                         result_text=entry.result_text)
            return entry.terminal

    def close(self) -> None:
        pass


class RemoteTranslationBackend:
    """Adapter for a hosted translation API.

    submit: ``POST {base}/translations`` with text/source_lang/target_lang,
    expecting ``201 {"job_id": ...}``.  poll: ``GET {base}/translations/{id}``
    returning status plus translated_text or reason.  Bearer-token auth.
    Snapshots are tracked per adapter instance, so only jobs submitted
    through this instance can be polled.
    """

    name = "remote"

    def __init__(self, base_url: str, api_key: str | None, *,
                 languages: Sequence[str] = DEFAULT_LANGUAGES,
                 client: httpx.Client | None = None, timeout: float = 10.0):
        self._base = base_url.rstrip("/")
        self._key = api_key
        self._languages = frozenset(languages)
        self._client = client if client is not None else httpx.Client(timeout=timeout)
        self._submitted: dict[str, TranslationJob] = {}
        self._terminal: dict[str, TranslationJob] = {}
        self._lock = threading.Lock()

    @property
    def languages(self) -> frozenset[str]:
        return self._languages

    def _auth(self) -> dict[str, str]:
        if not self._key:
            raise MissingCredentials("translation API key is not configured")
        return {"Authorization": f"Bearer {self._key}"}

    def submit(self, request: TranslationRequest) -> TranslationJob:
        headers = self._auth()
        _check_request(request, self._languages)
        try:
            resp = self._client.post(
                f"{self._base}/translations",
                json={"text": request.text,
                      "source_lang": request.source_lang,
                      "target_lang": request.target_lang},
                headers=headers,
            )
        except httpx.HTTPError as exc:
            raise BackendUnavailable(f"translation service unreachable: {exc}") from exc
        if resp.status_code in (401, 403):
            raise MissingCredentials("translation service rejected the API key")
        if resp.status_code != 201:
            raise BackendUnavailable(f"translation service returned HTTP {resp.status_code}")
        try:
            job_id = resp.json()["job_id"]
        except Exception as exc:
            raise BackendUnavailable("submit response carried no job_id") from exc
        if not isinstance(job_id, str) or not job_id:
            raise BackendUnavailable("submit response carried no job_id")
        job = TranslationJob(job_id, request, JobState.PENDING,
                             submitted_at=datetime.now(timezone.utc))
        with self._lock:
            self._submitted[job_id] = job
        return job

    def poll(self, job_id: str) -> TranslationJob:
        with self._lock:
            done = self._terminal.get(job_id)
            if done is not None:
                return done
            base = self._submitted.get(job_id)
        if base is None:
            raise UnknownJob(job_id)
        headers = self._auth()
        try:
            resp = self._client.get(f"{self._base}/translations/{job_id}", headers=headers)
        except httpx.HTTPError as exc:
            raise BackendUnavailable(f"translation service unreachable: {exc}") from exc
        if resp.status_code == 404:
            raise UnknownJob(job_id)
        if resp.status_code in (401, 403):
            raise MissingCredentials("translation service rejected the API key")
        if resp.status_code != 200:
            raise BackendUnavailable(f"translation service returned HTTP {resp.status_code}")
        try:
            body = resp.json()
        except Exception as exc:
            raise BackendUnavailable("poll response is not JSON") from exc
        status = body.get("status") if isinstance(body, dict) else None
        if status == "pending":
            return base
        if status == "running":
            return replace(base, state=JobState.RUNNING)
        now = datetime.now(timezone.utc)
        if status == "succeeded":
            text = body.get("translated_text")
            if not isinstance(text, str):
                raise BackendUnavailable("succeeded job carried no translated_text")
            snapshot = replace(base, state=JobState.SUCCEEDED, completed_at=now,
                               result_text=text)
        elif status == "failed":
            reason = body.get("reason")
            snapshot = replace(base, state=JobState.FAILED, completed_at=now,
                               failure_reason=reason if isinstance(reason, str) and reason
                               else "translation failed")
        else:
            raise BackendUnavailable(f"poll response carried unknown status {status!r}")
        with self._lock:
            self._terminal.setdefault(job_id, snapshot)
            return self._terminal[job_id]

    def close(self) -> None:
        self._client.close()
