"""Dictionary annotation of English report text.

Tokenize, look up token sequences in the match index, then resolve overlaps
leftmost-longest.  All offsets are Unicode scalar positions (plain Python
string indices), start inclusive, end exclusive, into the annotated text.
"""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass
from typing import Mapping, Sequence

import httpx

from .lexicon import MatchIndex
from .translator import BackendUnavailable, MissingCredentials


class MalformedPayload(Exception):
    """The remote annotator sent something that isn't an annotation document."""


@dataclass(frozen=True)
class Token:
    text: str
    start: int
    end: int


@dataclass(frozen=True)
class Annotation:
    term_id: str
    start: int
    end: int
    matched_text: str
    surface_form: str
    source: str  # "local" | "remote"


@dataclass(frozen=True)
class CandidateMatch:
    term_id: str
    start: int
    end: int
    matched_text: str
    surface_form: str
    token_span: tuple[int, int] | None = None  # (first token index, token count)


def tokenize(text: str) -> list[Token]:
    """Split into maximal runs of Unicode letters and digits.

    Everything else (hyphens, apostrophes, combining marks, punctuation)
    separates tokens.
    """
    tokens: list[Token] = []
    start: int | None = None
    for i, ch in enumerate(text):
        if ch.isalnum():
            if start is None:
                start = i
        elif start is not None:
            tokens.append(Token(text[start:i], start, i))
            start = None
    if start is not None:
        tokens.append(Token(text[start:], start, len(text)))
    return tokens


def normalize(text: str) -> str:
    """Casefold and strip diacritics (combining marks after decomposition)."""
    decomposed = unicodedata.normalize("NFD", text.casefold())
    return "".join(ch for ch in decomposed if not unicodedata.combining(ch))


def find_candidates(text: str, tokens: Sequence[Token], index: MatchIndex) -> list[CandidateMatch]:
    """Every index entry that matches a token run, sorted start asc, end desc."""
    norms = [normalize(tok.text) for tok in tokens]
    found: list[CandidateMatch] = []
    for i in range(len(tokens)):
        hits = list(index.walk(norms, i))
        for hit in reversed(hits):  # longest first, so ends descend within a start
            start = tokens[i].start
            end = tokens[i + hit.token_count - 1].end
            found.append(CandidateMatch(
                hit.term_id, start, end, text[start:end], hit.surface_form,
                (i, hit.token_count),
            ))
    return found


def resolve_overlaps(candidates: Sequence[CandidateMatch], *, source: str = "local") -> list[Annotation]:
    """Greedy leftmost-longest pass over (start asc, end desc)-sorted input."""
    kept: list[Annotation] = []
    for cand in candidates:
        if not kept or cand.start >= kept[-1].end:
            kept.append(Annotation(cand.term_id, cand.start, cand.end,
                                   cand.matched_text, cand.surface_form, source))
    return kept


def annotate(text: str, index: MatchIndex) -> list[Annotation]:
    return resolve_overlaps(find_candidates(text, tokenize(text), index))


@dataclass(frozen=True)
class AnnotationBatch:
    annotations: tuple[Annotation, ...]
    dropped: int = 0


def _remote_candidate(record: object, text: str) -> CandidateMatch | None:
    """Convert one remote record (1-based, end-inclusive) or reject it."""
    if not isinstance(record, dict):
        return None
    ident = record.get("id")
    frm = record.get("from")
    to = record.get("to")
    if not isinstance(ident, str) or not ident:
        return None
    if isinstance(frm, bool) or isinstance(to, bool):
        return None
    if not isinstance(frm, int) or not isinstance(to, int):
        return None
    if not (1 <= frm <= to <= len(text)):
        return None
    start, end = frm - 1, to
    snippet = text[start:end]
    claimed = record.get("matched_text")
    if claimed is not None and claimed != snippet:
        return None
    return CandidateMatch(ident, start, end, snippet, normalize(snippet))


def parse_remote_annotations(payload: bytes | str | object, text: str) -> AnnotationBatch:
    """Parse a remote annotation document against the text it annotates.

    Invalid records are dropped and counted; an undecodable document raises
    MalformedPayload.  Surviving records go through the same overlap
    resolution as local matches.
    """
    doc = payload
    if isinstance(payload, (bytes, str)):
        try:
            doc = json.loads(payload)
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise MalformedPayload(f"annotation payload is not valid JSON: {exc}") from exc
    if isinstance(doc, dict):
        doc = doc.get("annotations")
    if not isinstance(doc, list):
        raise MalformedPayload("expected a list of annotation records")
    dropped = 0
    candidates: list[CandidateMatch] = []
    for record in doc:
        cand = _remote_candidate(record, text)
        if cand is None:
            dropped += 1
        else:
            candidates.append(cand)
    candidates.sort(key=lambda c: (c.start, -c.end, c.term_id))
    return AnnotationBatch(tuple(resolve_overlaps(candidates, source="remote")), dropped)


class LocalAnnotator:
    """Annotates in process against the loaded match index."""

    name = "local"

    def __init__(self, index: MatchIndex):
        self._index = index

    def run(self, text: str) -> AnnotationBatch:
        return AnnotationBatch(tuple(annotate(text, self._index)), 0)


class RemoteAnnotator:
    """Adapter for an external annotation service.

    POSTs the text and converts the reply's 1-based inclusive offsets to the
    internal convention, dropping records that don't line up with the text.
    """

    name = "remote"

    def __init__(self, base_url: str, api_key: str | None, *,
                 client: httpx.Client | None = None, timeout: float = 30.0):
        self._base = base_url.rstrip("/")
        self._key = api_key
        self._client = client if client is not None else httpx.Client(timeout=timeout)

    def run(self, text: str) -> AnnotationBatch:
        if not self._key:
            raise MissingCredentials("annotator API key is not configured")
        try:
            resp = self._client.post(
                f"{self._base}/annotations",
                json={"text": text},
                headers={"Authorization": f"Bearer {self._key}"},
            )
        except httpx.HTTPError as exc:
            raise BackendUnavailable(f"annotator unreachable: {exc}") from exc
        if resp.status_code in (401, 403):
            raise MissingCredentials("annotator rejected the API key")
        if resp.status_code != 200:
            raise BackendUnavailable(f"annotator returned HTTP {resp.status_code}")
        return parse_remote_annotations(resp.content, text)

    def close(self) -> None:
        self._client.close()


def annotation_to_dict(ann: Annotation) -> dict:
    return {
        "term_id": ann.term_id,
        "start": ann.start,
        "end": ann.end,
        "matched_text": ann.matched_text,
        "surface_form": ann.surface_form,
        "source": ann.source,
    }


def annotation_from_dict(doc: Mapping) -> Annotation:
    return Annotation(
        term_id=doc["term_id"],
        start=int(doc["start"]),
        end=int(doc["end"]),
        matched_text=doc["matched_text"],
        surface_form=doc["surface_form"],
        source=doc["source"],
    )
