"""HTTP surface.

Every error body has the same shape: {"code": <machine tag>, "message": <human text>}.
Annotation offsets go out with an explicit offset_unit marker so clients
can't misread them as byte or UTF-16 positions.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from starlette.concurrency import run_in_threadpool
from starlette.exceptions import HTTPException as StarletteHTTPException

from .annotator import LocalAnnotator, RemoteAnnotator, annotation_to_dict
from .config import ConfigError, Settings
from .lexicon import (Lexicon, MatchIndex, UnknownTerm, build_match_index,
                      lookup_term, parse_lexicon)
from .pipeline import NotFailed, Pipeline
from .store import EmptyText, Report, Store, TooLarge, UnknownReport
from .translator import (MockTranslationBackend, RemoteTranslationBackend,
                         UnsupportedLanguage)

log = logging.getLogger(__name__)


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


@dataclass
class Service:
    """Everything the HTTP layer needs, wired together."""

    settings: Settings
    lexicon: Lexicon
    index: MatchIndex
    store: Store
    translator: object
    annotator: object
    pipeline: Pipeline

    def start(self) -> None:
        self.pipeline.start()

    def stop(self) -> None:
        self.pipeline.stop()
        for backend in (self.translator, self.annotator):
            close = getattr(backend, "close", None)
            if close:
                close()
        self.store.close()


def build_service(settings: Settings) -> Service:
    if settings.lexicon_path is None:
        raise ConfigError("MRA_LEXICON", "not set (path to the terminology TSV)")
    with open(settings.lexicon_path, encoding="utf-8") as fh:
        lexicon = parse_lexicon(fh)
    index = build_match_index(lexicon)
    store = Store(settings.journal_path, languages=settings.languages,
                  max_text_bytes=settings.max_text_bytes)
    if settings.translator == "remote":
        translator = RemoteTranslationBackend(settings.translation_url or "",
                                              settings.translation_key,
                                              languages=settings.languages)
    else:
        translator = MockTranslationBackend(latency_secs=settings.mock_latency_secs,
                                            languages=settings.languages)
    if settings.annotator == "remote":
        annotator = RemoteAnnotator(settings.annotator_url or "", settings.annotator_key)
    else:
        annotator = LocalAnnotator(index)
    pipeline = Pipeline(store, translator, annotator,
                        workers=settings.workers,
                        poll_secs=settings.poll_secs,
                        stall_secs=settings.stall_secs)
    return Service(settings, lexicon, index, store, translator, annotator, pipeline)


def _summary(report: Report) -> dict:
    return {
        "code": report.code,
        "category": report.category,
        "original_language": report.original_language,
        "created_at": report.created_at.isoformat(),
        "date": report.created_at.strftime("%Y-%m-%d %H:%M"),
        "status": report.status.value,
        "processed": report.processed,
    }


def _full(report: Report) -> dict:
    doc = _summary(report)
    doc["original_text"] = report.original_text
    doc["translated_text"] = report.translated_text
    doc["failure_reason"] = report.failure_reason
    doc["offset_unit"] = "scalar"
    doc["annotations"] = [annotation_to_dict(a) for a in report.annotations]
    return doc


def _parse_report_code(raw: str) -> int:
    try:
        code = int(raw)
    except ValueError:
        code = 0
    if code < 1:
        raise ApiError(404, "unknown_report", f"no report with code {raw!r}")
    return code


def _decode_utf8(raw: bytes) -> str:
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError:
        raise ApiError(415, "invalid_encoding", "report text must be UTF-8") from None


async def _report_fields(request: Request, max_bytes: int) -> tuple[str, str, str]:
    """Pull (text, category, language) out of a JSON or multipart upload."""
    ctype = request.headers.get("content-type", "")
    if ctype.startswith("multipart/form-data"):
        form = await request.form()
        upload = form.get("file")
        if upload is not None and hasattr(upload, "read"):
            raw = await upload.read()
            if len(raw) > max_bytes:
                raise ApiError(413, "too_large", f"report text exceeds {max_bytes} bytes")
            text = _decode_utf8(raw)
        else:
            value = form.get("text")
            if not isinstance(value, str):
                raise ApiError(400, "invalid_request", "provide a file upload or a text field")
            text = value
        category = form.get("category")
        language = form.get("language")
    else:
        raw = await request.body()
        if len(raw) > max_bytes + 4096:  # envelope allowance around the text
            raise ApiError(413, "too_large", f"report text exceeds {max_bytes} bytes")
        import json
        try:
            doc = json.loads(_decode_utf8(raw))
        except ValueError:
            raise ApiError(400, "invalid_request", "body must be JSON or multipart/form-data") from None
        if not isinstance(doc, dict) or not isinstance(doc.get("text"), str):
            raise ApiError(400, "invalid_request", "expected an object with a text field")
        text = doc["text"]
        category = doc.get("category")
        language = doc.get("language")
    if not isinstance(language, str) or not language:
        raise ApiError(400, "invalid_request", "language is required")
    if not isinstance(category, str) or not category.strip():
        category = "Unknown"
    return text, category.strip(), language


def build_app(service: Service) -> FastAPI:
    app = FastAPI(title="mra", docs_url=None, redoc_url=None, openapi_url=None)
    store = service.store

    @app.exception_handler(ApiError)
    async def _api_error(_request, exc: ApiError):
        return JSONResponse(status_code=exc.status,
                            content={"code": exc.code, "message": exc.message})

    @app.exception_handler(StarletteHTTPException)
    async def _http_error(_request, exc: StarletteHTTPException):
        tag = {404: "not_found", 405: "method_not_allowed"}.get(exc.status_code, "error")
        return JSONResponse(status_code=exc.status_code,
                            content={"code": tag, "message": str(exc.detail)})

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_request, exc: RequestValidationError):
        return JSONResponse(status_code=400,
                            content={"code": "invalid_request", "message": str(exc)})

    @app.exception_handler(Exception)
    async def _crash(_request, exc: Exception):
        log.exception("unhandled error: %s", exc)
        return JSONResponse(status_code=500,
                            content={"code": "internal_error", "message": "internal error"})

    @app.get("/health")
    async def health():
        return {"status": "ok",
                "translator": getattr(service.translator, "name", "unknown"),
                "annotator": getattr(service.annotator, "name", "unknown")}

    @app.post("/reports", status_code=201)
    async def create_report(request: Request):
        text, category, language = await _report_fields(request, service.settings.max_text_bytes)
        try:
            report = await run_in_threadpool(
                lambda: store.create_report(category, language, text,
                                            owner=f"api@{os.getpid()}"))
        except EmptyText:
            raise ApiError(400, "empty_text", "report text is empty") from None
        except TooLarge as exc:
            raise ApiError(413, "too_large", str(exc)) from None
        except UnsupportedLanguage as exc:
            raise ApiError(400, "unsupported_language", str(exc)) from None
        service.pipeline.enqueue(report.code)
        return JSONResponse(status_code=201, content={"code": report.code})

    @app.get("/reports")
    async def list_reports():
        return [_summary(r) for r in store.list_reports()]

    @app.get("/reports/{code}")
    async def get_report(code: str):
        try:
            return _full(store.load_report(_parse_report_code(code)))
        except UnknownReport:
            raise ApiError(404, "unknown_report", f"no report with code {code}") from None

    @app.get("/reports/{code}/annotations")
    async def get_annotations(code: str):
        try:
            report = store.load_report(_parse_report_code(code))
        except UnknownReport:
            raise ApiError(404, "unknown_report", f"no report with code {code}") from None
        return {"report_code": report.code,
                "offset_unit": "scalar",
                "annotations": [annotation_to_dict(a) for a in report.annotations]}

    @app.post("/reports/{code}/reprocess")
    async def reprocess(code: str):
        parsed = _parse_report_code(code)
        try:
            report = await run_in_threadpool(service.pipeline.reprocess, parsed)
        except UnknownReport:
            raise ApiError(404, "unknown_report", f"no report with code {code}") from None
        except NotFailed as exc:
            raise ApiError(409, "not_failed",
                           f"report {parsed} is {exc.status.value}; only Failed reports can be reprocessed") from None
        return JSONResponse(status_code=202,
                            content={"code": report.code, "status": report.status.value})

    @app.get("/terms/{term_id}")
    async def get_term(term_id: str):
        try:
            term = lookup_term(service.lexicon, term_id)
        except UnknownTerm:
            raise ApiError(404, "unknown_term", f"no term with id {term_id!r}") from None
        return {"id": term.id,
                "preferred_label": term.preferred_label,
                "synonyms": list(term.synonyms),
                "parent_id": term.parent_id}

    ui_dir = service.settings.ui_dir
    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    else:
        @app.get("/")
        async def root():
            return {"service": "mra", "reports": "/reports", "health": "/health"}

    return app
