"""Terminology lexicon: TSV parsing, validation, and the token-trie index.

Lexicon files are UTF-8 text, LF line endings, one term per line:

    id <TAB> preferred_label <TAB> synonyms <TAB> parent_id

Ids look like ``RID123``.  The synonyms field is ``|``-separated and may be
empty, parent_id may be empty.  Lines starting with ``#`` and blank lines are
skipped.  There is no quoting: tab and ``|`` cannot appear inside labels.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import IO, Iterable, Iterator, Mapping, Sequence

ID_PATTERN = re.compile(r"RID[0-9]+\Z")


class LexiconError(Exception):
    """A lexicon file could not be parsed. Carries the 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.message = message
        self.line = line


class MalformedLine(LexiconError):
    pass


class InvalidId(LexiconError):
    pass


class DuplicateId(LexiconError):
    pass


class DanglingParent(LexiconError):
    pass


class UnknownTerm(LookupError):
    pass


@dataclass(frozen=True)
class LexiconIssue:
    """One validation problem, for reporting that doesn't stop at the first."""

    line: int
    kind: str  # malformed-line | invalid-id | duplicate-id | dangling-parent
    message: str

    def __str__(self) -> str:
        return f"line {self.line}: {self.message}"


_ISSUE_ERRORS = {
    "malformed-line": MalformedLine,
    "invalid-id": InvalidId,
    "duplicate-id": DuplicateId,
    "dangling-parent": DanglingParent,
}


@dataclass(frozen=True)
class LexiconTerm:
    id: str
    preferred_label: str
    synonyms: tuple[str, ...] = ()
    parent_id: str | None = None

    def surface_strings(self) -> Iterator[str]:
        yield self.preferred_label
        yield from self.synonyms


def numeric_id(term_id: str) -> int:
    return int(term_id[3:])


def _id_order(term_id: str) -> tuple[int, str]:
    return (numeric_id(term_id), term_id)


@dataclass(frozen=True)
class Lexicon:
    """Parsed terminology: terms by id plus the normalized surface-form map.

    ``surface_forms`` maps each normalized surface string to the owning term
    id; when two terms share a surface form the one with the smallest numeric
    id wins.
    """

    terms: dict[str, LexiconTerm]
    surface_forms: dict[str, str]

    @classmethod
    def from_terms(cls, terms: Iterable[LexiconTerm]) -> "Lexicon":
        from .annotator import normalize  # annotator imports this module; import late

        by_id: dict[str, LexiconTerm] = {}
        for term in terms:
            if term.id in by_id:
                raise DuplicateId(f"duplicate id {term.id}")
            by_id[term.id] = term
        surface: dict[str, str] = {}
        for term in by_id.values():
            for form in term.surface_strings():
                norm = normalize(form)
                if not norm.strip():
                    continue
                prev = surface.get(norm)
                if prev is None or _id_order(term.id) < _id_order(prev):
                    surface[norm] = term.id
        return cls(by_id, surface)

    def __len__(self) -> int:
        return len(self.terms)


def lookup_term(lexicon: Lexicon, term_id: str) -> LexiconTerm:
    try:
        return lexicon.terms[term_id]
    except KeyError:
        raise UnknownTerm(term_id) from None


@dataclass(frozen=True)
class TermHit:
    """Accepting-state payload of the match index."""

    term_id: str
    surface_form: str  # normalized form that produced this entry
    token_count: int


def _hit_order(hit: TermHit) -> tuple[int, str, str]:
    return (numeric_id(hit.term_id), hit.term_id, hit.surface_form)


class MatchIndex:
    """Token-sequence trie over the normalized surface forms of a lexicon.

    Nodes are plain dicts keyed by token text; an accepting node stores its
    TermHit under the key ``None`` (token texts are always strings, so the
    key cannot collide).  Instances are built once and treated as immutable.
    """

    __slots__ = ("_root", "_entries")

    def __init__(self, entries: Mapping[tuple[str, ...], TermHit]):
        self._entries = dict(entries)
        root: dict = {}
        for seq, hit in self._entries.items():
            node = root
            for token in seq:
                node = node.setdefault(token, {})
            node[None] = hit
        self._root = root

    def __len__(self) -> int:
        return len(self._entries)

    def entries(self) -> dict[tuple[str, ...], TermHit]:
        """All accepted token sequences, as a copy."""
        return dict(self._entries)

    def walk(self, tokens: Sequence[str], start: int) -> Iterator[TermHit]:
        """Yield the hit of every entry matching a prefix of tokens[start:].

        Hits come out shortest-first; callers reorder as they need.
        """
        node = self._root
        for i in range(start, len(tokens)):
            node = node.get(tokens[i])
            if node is None:
                return
            hit = node.get(None)
            if hit is not None:
                yield hit


def build_match_index(lexicon: Lexicon) -> MatchIndex:
    from .annotator import tokenize  # annotator imports this module; import late

    best: dict[tuple[str, ...], TermHit] = {}
    for form, term_id in lexicon.surface_forms.items():
        seq = tuple(tok.text for tok in tokenize(form))
        if not seq:
            continue
        hit = TermHit(term_id, form, len(seq))
        prev = best.get(seq)
        if prev is None or _hit_order(hit) < _hit_order(prev):
            best[seq] = hit
    return MatchIndex(best)


def _scan(text: str) -> tuple[list[tuple[int, LexiconTerm]], list[LexiconIssue]]:
    """Parse every data line, collecting issues instead of stopping."""
    rows: list[tuple[int, LexiconTerm]] = []
    issues: list[LexiconIssue] = []
    first_line_of: dict[str, int] = {}

    def problem(line_no: int, kind: str, message: str) -> None:
        issues.append(LexiconIssue(line_no, kind, message))

    for line_no, raw in enumerate(text.split("\n"), start=1):
        line = raw[:-1] if raw.endswith("\r") else raw
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 4:
            problem(line_no, "malformed-line",
                    f"expected 4 tab-separated fields, got {len(fields)}")
            continue
        term_id, label, synonyms_field, parent_field = fields
        ok = True
        if not ID_PATTERN.match(term_id):
            problem(line_no, "invalid-id", f"invalid term id {term_id!r}")
            ok = False
        if not label:
            problem(line_no, "malformed-line", "empty preferred_label")
            ok = False
        elif "|" in label:
            problem(line_no, "malformed-line", "'|' not allowed in preferred_label")
            ok = False
        synonyms: tuple[str, ...] = ()
        if synonyms_field:
            parts = synonyms_field.split("|")
            if any(not p for p in parts):
                problem(line_no, "malformed-line", "empty synonym")
                ok = False
            else:
                synonyms = tuple(sorted(set(parts)))
        parent: str | None = None
        if parent_field:
            if not ID_PATTERN.match(parent_field):
                problem(line_no, "invalid-id", f"invalid parent id {parent_field!r}")
                ok = False
            else:
                parent = parent_field
        if not ok:
            continue
        if term_id in first_line_of:
            problem(line_no, "duplicate-id",
                    f"duplicate id {term_id} (first defined at line {first_line_of[term_id]})")
            continue
        first_line_of[term_id] = line_no
        rows.append((line_no, LexiconTerm(term_id, label, synonyms, parent)))

    known = {term.id for _, term in rows}
    for line_no, term in rows:
        if term.parent_id is not None and term.parent_id not in known:
            problem(line_no, "dangling-parent",
                    f"parent {term.parent_id} of {term.id} is not defined")
    issues.sort(key=lambda issue: issue.line)
    return rows, issues


def _read(source: str | IO[str]) -> str:
    if hasattr(source, "read"):
        return source.read()  # type: ignore[union-attr]
    return source  # type: ignore[return-value]


def validate_lexicon(source: str | IO[str]) -> tuple[Lexicon | None, list[LexiconIssue]]:
    """Check a whole file, reporting every problem found.

    Returns the lexicon and an empty list when the file is clean, otherwise
    (None, issues).
    """
    rows, issues = _scan(_read(source))
    if issues:
        return None, issues
    return Lexicon.from_terms(term for _, term in rows), issues


def parse_lexicon(source: str | IO[str]) -> Lexicon:
    """Parse a lexicon file, raising on the first problem found."""
    lexicon, issues = validate_lexicon(source)
    if issues:
        first = issues[0]
        raise _ISSUE_ERRORS[first.kind](first.message, first.line)
    assert lexicon is not None
    return lexicon


def serialize_lexicon(lexicon: Lexicon) -> str:
    """Canonical TSV: terms by numeric id, synonyms sorted. Reparses equal."""
    lines = []
    for term in sorted(lexicon.terms.values(), key=lambda t: _id_order(t.id)):
        lines.append("\t".join([
            term.id,
            term.preferred_label,
            "|".join(sorted(term.synonyms)),
            term.parent_id or "",
        ]))
    return "".join(line + "\n" for line in lines)
