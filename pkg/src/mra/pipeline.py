"""Drives reports through the lifecycle: worker pool, translation polling, janitor.

Ownership of a report is a per-code non-blocking lock.  Whoever acquires it
keeps stepping that report until it is terminal (or shutdown); everyone else
walks away, so duplicate queue entries are harmless.  Every step persists
its journal record before acting on the outcome, which is what makes a
killed process resumable from any point.
"""

from __future__ import annotations

import logging
import os
import queue
import threading
import time
from datetime import datetime, timezone

from .annotator import MalformedPayload
from .lifecycle import IllegalTransition, ReportStatus, Start, step
from .store import RecordKind, Report, Store, UnknownReport, record_annotations_payload
from .translator import (BackendUnavailable, JobState, TranslationError,
                         TranslationRequest)

log = logging.getLogger(__name__)


class NotFailed(Exception):
    def __init__(self, code: int, status: ReportStatus):
        super().__init__(f"report {code} is {status.value}, not Failed")
        self.code = code
        self.status = status


def _owner(name: str) -> str:
    return f"{name}@{os.getpid()}"


class Pipeline:
    def __init__(self, store: Store, translator, annotator, *,
                 workers: int = 4, poll_secs: float = 2.0,
                 stall_secs: float = 900.0):
        self._store = store
        self._translator = translator
        self._annotator = annotator
        self._worker_count = max(1, int(workers))
        self._poll_secs = max(0.01, float(poll_secs))
        self._stall_secs = max(0.1, float(stall_secs))
        self._queue: queue.Queue[int] = queue.Queue()
        self._locks: dict[int, threading.Lock] = {}
        self._locks_guard = threading.Lock()
        self._stop = threading.Event()
        self._threads: list[threading.Thread] = []
        self._started_at = datetime.now(timezone.utc)

    # -- lifecycle of the pool itself ------------------------------------

    def start(self) -> None:
        if self._threads:
            return
        self._stop.clear()
        # Old journal timestamps don't count against the stall timeout:
        # a restarted service gets a full window to resume pending work.
        self._started_at = datetime.now(timezone.utc)
        for i in range(self._worker_count):
            name = f"worker-{i + 1}"
            t = threading.Thread(target=self._worker_loop, args=(_owner(name),),
                                 name=name, daemon=True)
            t.start()
            self._threads.append(t)
        janitor = threading.Thread(target=self._janitor_loop, name="janitor", daemon=True)
        janitor.start()
        self._threads.append(janitor)
        for report in self._store.list_reports():
            if not report.is_terminal:
                self.enqueue(report.code)

    def stop(self) -> None:
        self._stop.set()
        for t in self._threads:
            t.join(timeout=5.0)
        self._threads.clear()

    def enqueue(self, code: int) -> None:
        self._queue.put(code)

    def reprocess(self, code: int, *, owner: str | None = None) -> Report:
        """Failed -> Received, wiping derived fields, and queue it again."""
        owner = owner or _owner("api")
        report = self._store.load_report(code)
        if report.status is not ReportStatus.FAILED:
            raise NotFailed(code, report.status)
        try:
            report = self._store.save_transition(
                code, owner, RecordKind.STATUS_CHANGED,
                {"from": ReportStatus.FAILED.value, "to": ReportStatus.RECEIVED.value})
        except IllegalTransition:
            raise NotFailed(code, self._store.load_report(code).status) from None
        self.enqueue(code)
        return report

    # -- worker side ------------------------------------------------------

    def _lock_for(self, code: int) -> threading.Lock:
        with self._locks_guard:
            lock = self._locks.get(code)
            if lock is None:
                lock = self._locks[code] = threading.Lock()
            return lock

    def _worker_loop(self, owner: str) -> None:
        while not self._stop.is_set():
            try:
                code = self._queue.get(timeout=0.2)
            except queue.Empty:
                continue
            try:
                self._run_report(code, owner)
            except Exception:
                log.exception("%s: report %s blew up", owner, code)
            finally:
                self._queue.task_done()

    def _run_report(self, code: int, owner: str) -> None:
        lock = self._lock_for(code)
        if not lock.acquire(blocking=False):
            return  # someone else owns it and will finish the job
        try:
            while not self._stop.is_set():
                try:
                    report = self._store.load_report(code)
                except UnknownReport:
                    return
                if report.is_terminal:
                    return
                try:
                    self._step_once(report, owner)
                except IllegalTransition:
                    # Lost a race with a writer outside the lock (reprocess);
                    # reload and take it from the current status.
                    continue
        finally:
            lock.release()

    def _step_once(self, report: Report, owner: str) -> None:
        status = report.status
        if status in (ReportStatus.RECEIVED, ReportStatus.TRANSLATED):
            target = step(status, report.original_language, Start())
            self._change_status(report, target, owner)
        elif status is ReportStatus.TRANSLATING:
            self._translate(report, owner)
        elif status is ReportStatus.ANNOTATING:
            self._annotate(report, owner)

    def _change_status(self, report: Report, target: ReportStatus, owner: str,
                       reason: str | None = None) -> None:
        payload = {"from": report.status.value, "to": target.value}
        if reason is not None:
            payload["reason"] = reason
        self._store.save_transition(report.code, owner, RecordKind.STATUS_CHANGED, payload)

    def _fail(self, report: Report, owner: str, reason: str) -> None:
        self._change_status(report, ReportStatus.FAILED, owner, reason=reason)

    def _translate(self, report: Report, owner: str) -> None:
        request = TranslationRequest(report.original_text, report.original_language)
        try:
            job = self._translator.submit(request)
        except (TranslationError, ValueError) as exc:
            self._fail(report, owner, f"translation submit failed: {exc}")
            return
        deadline = time.monotonic() + self._stall_secs
        while not self._stop.is_set():
            if time.monotonic() > deadline:
                self._fail(report, owner, "translation timed out")
                return
            try:
                snapshot = self._translator.poll(job.job_id)
            except BackendUnavailable:
                self._stop.wait(self._poll_secs)  # transient; deadline bounds it
                continue
            except TranslationError as exc:
                self._fail(report, owner, f"translation failed: {exc}")
                return
            if snapshot.state is JobState.SUCCEEDED:
                self._store.save_transitions(report.code, owner, [
                    (RecordKind.TRANSLATION_RECORDED,
                     {"text": snapshot.result_text, "job_id": job.job_id}),
                    (RecordKind.STATUS_CHANGED,
                     {"from": ReportStatus.TRANSLATING.value,
                      "to": ReportStatus.TRANSLATED.value}),
                ])
                return
            if snapshot.state is JobState.FAILED:
                self._fail(report, owner, snapshot.failure_reason or "translation failed")
                return
            self._stop.wait(self._poll_secs)
        # shutdown requested: leave the report in Translating for the next run

    def _annotate(self, report: Report, owner: str) -> None:
        if report.original_language != "en" and report.translated_text is None:
            self._fail(report, owner, "translated text is missing")
            return
        try:
            batch = self._annotator.run(report.annotation_text)
        except (BackendUnavailable, MalformedPayload, TranslationError) as exc:
            self._fail(report, owner, f"annotation failed: {exc}")
            return
        self._store.save_transitions(report.code, owner, [
            (RecordKind.ANNOTATIONS_RECORDED,
             record_annotations_payload(batch.annotations, batch.dropped)),
            (RecordKind.STATUS_CHANGED,
             {"from": ReportStatus.ANNOTATING.value, "to": ReportStatus.DONE.value}),
        ])

    # -- janitor ----------------------------------------------------------

    def _janitor_loop(self) -> None:
        interval = max(0.1, min(self._poll_secs, self._stall_secs / 4))
        while not self._stop.wait(interval):
            try:
                self.sweep_stalled()
            except Exception:
                log.exception("janitor sweep blew up")

    def sweep_stalled(self, now: datetime | None = None) -> list[int]:
        """Fail reports stuck mid-step past the stall timeout; requeue idle ones.

        Returns the codes that were failed.
        """
        now = now or datetime.now(timezone.utc)
        owner = _owner("janitor")
        failed: list[int] = []
        for report in self._store.list_reports():
            if report.is_terminal:
                continue
            if self._age_secs(report, now) <= self._stall_secs:
                continue
            lock = self._lock_for(report.code)
            if not lock.acquire(blocking=False):
                continue  # actively owned, so not stalled
            try:
                current = self._store.load_report(report.code)
                if current.is_terminal or self._age_secs(current, now) <= self._stall_secs:
                    continue
                if current.status in (ReportStatus.TRANSLATING, ReportStatus.ANNOTATING):
                    self._fail(current, owner, "stalled")
                    failed.append(current.code)
                else:
                    # Received/Translated with no owner: the queue entry was
                    # lost somewhere, so hand it back to the workers.
                    self.enqueue(current.code)
            except (UnknownReport, IllegalTransition):
                pass
            finally:
                lock.release()
        return failed

    def _age_secs(self, report: Report, now: datetime) -> float:
        last = self._store.last_activity(report.code) or report.created_at
        if self._started_at > last:
            last = self._started_at
        return (now - last).total_seconds()
