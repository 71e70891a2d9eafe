import re

import pytest
from fastapi.testclient import TestClient

from mra.annotator import LocalAnnotator, annotate, annotation_to_dict
from mra.api import Service, build_app, build_service
from mra.lexicon import build_match_index, parse_lexicon
from mra.pipeline import Pipeline
from mra.store import Store
from mra.translator import MockTranslationBackend

from helpers import SAMPLE_LEXICON, make_settings, wait_until

EN_TEXT = "Chest X-ray shows a small pleural effusion."
PT_TEXT = "Ecografia mostra derrame pleural."


@pytest.fixture
def client(make_service):
    service = make_service()
    with TestClient(build_app(service)) as c:
        c.service = service
        yield c


def create(client, text=EN_TEXT, language="en", category="Radiograph"):
    resp = client.post("/reports", json={
        "text": text, "language": language, "category": category})
    assert resp.status_code == 201, resp.text
    return resp.json()["code"]


def wait_done(client, code):
    assert wait_until(
        lambda: client.get(f"/reports/{code}").json()["status"] in ("Done", "Failed"))
    doc = client.get(f"/reports/{code}").json()
    assert doc["status"] == "Done", doc
    return doc


def assert_error(resp, status, code):
    assert resp.status_code == status, resp.text
    body = resp.json()
    assert set(body) == {"code", "message"}
    assert body["code"] == code
    assert body["message"]


# -- creating and reading reports ---------------------------------------------


def test_json_upload_end_to_end(client):
    code = create(client)
    assert code == 1
    doc = wait_done(client, code)
    assert doc["original_text"] == EN_TEXT
    assert doc["translated_text"] is None
    assert doc["original_language"] == "en"
    assert doc["category"] == "Radiograph"
    assert doc["processed"] is True
    assert doc["offset_unit"] == "scalar"
    ids = [a["term_id"] for a in doc["annotations"]]
    assert "RID111" in ids  # pleural effusion
    for ann in doc["annotations"]:
        assert EN_TEXT[ann["start"]:ann["end"]] == ann["matched_text"]


def test_api_annotations_match_library_output(client, sample_index):
    code = create(client)
    doc = wait_done(client, code)
    expected = [annotation_to_dict(a) for a in annotate(EN_TEXT, sample_index)]
    assert doc["annotations"] == expected


def test_multipart_file_upload(client):
    resp = client.post("/reports",
                       files={"file": ("report.txt", PT_TEXT.encode("utf-8"))},
                       data={"language": "pt", "category": "Ultrasound"})
    assert resp.status_code == 201
    doc = wait_done(client, resp.json()["code"])
    assert doc["original_text"] == PT_TEXT
    assert doc["translated_text"] == "ultrasound shows pleural effusion."
    assert [a["term_id"] for a in doc["annotations"]] == ["RID14", "RID111"]


def test_multipart_text_field_upload(client):
    resp = client.post("/reports", files={"text": (None, EN_TEXT),
                                          "language": (None, "en")})
    assert resp.status_code == 201
    doc = client.get(f"/reports/{resp.json()['code']}").json()
    assert doc["original_text"] == EN_TEXT
    assert doc["category"] == "Unknown"  # not given


def test_listing_is_newest_first_with_display_dates(client):
    first = create(client, category="MRI")
    second = create(client, text=PT_TEXT, language="pt", category="Ultrasound")
    listing = client.get("/reports").json()
    assert [d["code"] for d in listing] == [second, first]
    for doc in listing:
        assert set(doc) == {"code", "category", "original_language",
                            "created_at", "date", "status", "processed"}
        assert re.fullmatch(r"\d{4}-\d{2}-\d{2} \d{2}:\d{2}", doc["date"])


def test_annotations_endpoint_envelope(client):
    code = create(client)
    doc = wait_done(client, code)
    got = client.get(f"/reports/{code}/annotations")
    assert got.status_code == 200
    body = got.json()
    assert body["report_code"] == code
    assert body["offset_unit"] == "scalar"
    assert body["annotations"] == doc["annotations"]


def test_health_reports_backends_and_nothing_else(client):
    body = client.get("/health").json()
    assert body == {"status": "ok", "translator": "mock", "annotator": "local"}


def test_term_lookup(client):
    body = client.get("/terms/RID111").json()
    assert body["id"] == "RID111"
    assert body["preferred_label"] == "pleural effusion"
    assert "pleural fluid" in body["synonyms"]
    assert body["parent_id"]
    assert_error(client.get("/terms/RID99999"), 404, "unknown_term")


def test_root_json_when_no_ui_is_configured(client):
    body = client.get("/").json()
    assert body["reports"] == "/reports"


def test_static_ui_mount(make_service, tmp_path):
    ui = tmp_path / "ui"
    ui.mkdir()
    (ui / "index.html").write_text("<!doctype html><title>mra</title>")
    service = make_service(ui_dir=ui)
    with TestClient(build_app(service)) as client:
        resp = client.get("/")
        assert resp.status_code == 200
        assert resp.headers["content-type"].startswith("text/html")
        assert "mra" in resp.text
        # API routes are still reachable alongside the static mount.
        assert client.get("/reports").json() == []


# -- error responses ----------------------------------------------------------


def test_missing_language(client):
    assert_error(client.post("/reports", json={"text": "x"}), 400, "invalid_request")


def test_unsupported_language(client):
    resp = client.post("/reports", json={"text": "x", "language": "xx"})
    assert_error(resp, 400, "unsupported_language")
    resp = client.post("/reports", json={"text": "x", "language": "EN"})
    assert_error(resp, 400, "unsupported_language")


def test_empty_text(client):
    resp = client.post("/reports", json={"text": "  \n ", "language": "en"})
    assert_error(resp, 400, "empty_text")


def test_malformed_bodies(client):
    resp = client.post("/reports", content=b"not json",
                       headers={"content-type": "application/json"})
    assert_error(resp, 400, "invalid_request")
    resp = client.post("/reports", json=["a", "list"])
    assert_error(resp, 400, "invalid_request")
    resp = client.post("/reports", json={"text": 42, "language": "en"})
    assert_error(resp, 400, "invalid_request")
    resp = client.post("/reports", files={"other": ("x.bin", b"123")},
                       data={"language": "en"})
    assert_error(resp, 400, "invalid_request")


def test_invalid_encoding(client):
    resp = client.post("/reports",
                       files={"file": ("r.txt", b"\xff\xfe broken")},
                       data={"language": "en"})
    assert_error(resp, 415, "invalid_encoding")


def test_too_large(make_service):
    service = make_service(max_text_bytes=64)
    with TestClient(build_app(service)) as client:
        big = "effusion " * 20  # 180 bytes
        resp = client.post("/reports", json={"text": big, "language": "en"})
        assert_error(resp, 413, "too_large")
        resp = client.post("/reports",
                           files={"file": ("r.txt", big.encode())},
                           data={"language": "en"})
        assert_error(resp, 413, "too_large")
        ok = client.post("/reports", json={"text": "small", "language": "en"})
        assert ok.status_code == 201


@pytest.mark.parametrize("raw", ["999", "0", "-3", "abc", "1.5"])
def test_unknown_report_codes(client, raw):
    assert_error(client.get(f"/reports/{raw}"), 404, "unknown_report")
    assert_error(client.get(f"/reports/{raw}/annotations"), 404, "unknown_report")
    assert_error(client.post(f"/reports/{raw}/reprocess"), 404, "unknown_report")


def test_unknown_route_and_method_keep_the_error_shape(client):
    assert_error(client.get("/nope"), 404, "not_found")
    resp = client.delete("/reports")
    assert_error(resp, 405, "method_not_allowed")


def test_reprocess_conflicts_on_non_failed(client):
    code = create(client)
    wait_done(client, code)
    resp = client.post(f"/reports/{code}/reprocess")
    assert_error(resp, 409, "not_failed")
    assert "Done" in resp.json()["message"]


def test_reprocess_failed_report(tmp_path):
    # Wire a service whose translator always fails, so the report lands in
    # Failed through the normal pipeline; then swap behaviour and reprocess.
    settings = make_settings(tmp_path / "data")
    with open(SAMPLE_LEXICON, encoding="utf-8") as fh:
        lexicon = parse_lexicon(fh)
    index = build_match_index(lexicon)
    store = Store(settings.journal_path, languages=settings.languages)
    translator = MockTranslationBackend(fail_with="engine offline")
    annotator = LocalAnnotator(index)
    pipeline = Pipeline(store, translator, annotator, workers=2,
                        poll_secs=0.02, stall_secs=30.0)
    service = Service(settings, lexicon, index, store, translator,
                      annotator, pipeline)
    service.start()
    try:
        with TestClient(build_app(service)) as client:
            code = create(client, text=PT_TEXT, language="pt")
            assert wait_until(
                lambda: client.get(f"/reports/{code}").json()["status"] == "Failed")
            assert client.get(f"/reports/{code}").json()["failure_reason"] == \
                "engine offline"

            translator._fail_with = None  # backend recovers
            resp = client.post(f"/reports/{code}/reprocess")
            assert resp.status_code == 202
            assert resp.json() == {"code": code, "status": "Received"}
            doc = wait_done(client, code)
            assert doc["failure_reason"] is None
            assert doc["translated_text"] is not None
    finally:
        service.stop()


def test_build_service_requires_lexicon(tmp_path):
    from mra.config import ConfigError
    with pytest.raises(ConfigError, match="MRA_LEXICON"):
        build_service(make_settings(tmp_path / "d", lexicon_path=None))
