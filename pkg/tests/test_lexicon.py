import io
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mra.lexicon import (DanglingParent, DuplicateId, InvalidId, Lexicon,
                         LexiconTerm, MalformedLine, UnknownTerm,
                         build_match_index, lookup_term, numeric_id,
                         parse_lexicon, serialize_lexicon, validate_lexicon)

from helpers import SAMPLE_LEXICON
from oracle import make_rng_lexicon

GOOD = (
    "# terminology sample\n"
    "RID7\tpleural effusion\tpleural fluid|fluid collection\tRID2\n"
    "\n"
    "RID2\teffusion\t\t\n"
    "RID10\tchest\tthorax\t\n"
)


def test_parse_good_file():
    lex = parse_lexicon(io.StringIO(GOOD))
    assert set(lex.terms) == {"RID7", "RID2", "RID10"}
    term = lex.terms["RID7"]
    assert term.preferred_label == "pleural effusion"
    assert term.synonyms == ("fluid collection", "pleural fluid")  # sorted
    assert term.parent_id == "RID2"  # forward reference resolves
    assert lex.terms["RID2"].synonyms == ()
    assert lex.terms["RID10"].parent_id is None


def test_parse_tolerates_crlf_and_duplicate_synonyms():
    lex = parse_lexicon("RID1\tchest\tthorax|thorax\t\r\n")
    assert lex.terms["RID1"].synonyms == ("thorax",)


@pytest.mark.parametrize("line,error", [
    ("RID1\tchest\t", MalformedLine),                # 3 fields
    ("RID1\tchest\t\tRID2\textra", MalformedLine),   # 5 fields
    ("RID1\t\t\t", MalformedLine),                   # empty label
    ("RID1\ta|b\t\t", MalformedLine),                # pipe inside label
    ("RID1\tchest\tthorax||ribcage\t", MalformedLine),  # empty synonym
    ("rid1\tchest\t\t", InvalidId),
    ("RID\tchest\t\t", InvalidId),
    ("RID1x\tchest\t\t", InvalidId),
    ("RID1\tchest\t\tR2D2", InvalidId),              # bad parent id
    ("RID1\tchest\t\tRID99", DanglingParent),
])
def test_parse_line_errors(line, error):
    with pytest.raises(error) as exc:
        parse_lexicon(line + "\n")
    assert exc.value.line == 1


def test_duplicate_id_cites_both_lines():
    text = "RID1\tchest\t\t\nRID2\tlung\t\t\nRID1\theart\t\t\n"
    with pytest.raises(DuplicateId) as exc:
        parse_lexicon(text)
    assert exc.value.line == 3
    assert "first defined at line 1" in str(exc.value)


def test_parse_raises_earliest_problem():
    text = "RID1\tchest\t\t\nbroken line\nRIDx\tlung\t\t\n"
    with pytest.raises(MalformedLine) as exc:
        parse_lexicon(text)
    assert exc.value.line == 2


def test_validate_collects_every_issue():
    text = (
        "RID1\tchest\t\t\n"          # 1 ok
        "no tabs here\n"              # 2 malformed
        "RIDx\tlung\t\t\n"           # 3 invalid id
        "RID1\theart\t\t\n"          # 4 duplicate
        "RID5\tliver\ta||b\t\n"      # 5 empty synonym
        "RID6\tspleen\t\tRID42\n"    # 6 dangling parent
    )
    lex, issues = validate_lexicon(text)
    assert lex is None
    assert [(i.line, i.kind) for i in issues] == [
        (2, "malformed-line"),
        (3, "invalid-id"),
        (4, "duplicate-id"),
        (5, "malformed-line"),
        (6, "dangling-parent"),
    ]
    assert all(str(i).startswith(f"line {i.line}:") for i in issues)


def test_validate_clean_returns_lexicon():
    lex, issues = validate_lexicon(GOOD)
    assert issues == []
    assert lex is not None and len(lex) == 3


def test_lookup_term(demo_lexicon):
    assert lookup_term(demo_lexicon, "RID2").preferred_label == "effusion"
    with pytest.raises(UnknownTerm):
        lookup_term(demo_lexicon, "RID404")


def test_numeric_id():
    assert numeric_id("RID42") == 42
    assert numeric_id("RID007") == 7


def test_ambiguous_surface_form_goes_to_smallest_numeric_id():
    lex = Lexicon.from_terms([
        LexiconTerm("RID10", "edema"),
        LexiconTerm("RID2", "Edema"),  # same normalized form
    ])
    assert lex.surface_forms["edema"] == "RID2"  # numeric 2 < 10


def test_surface_forms_are_normalized():
    lex = Lexicon.from_terms([LexiconTerm("RID1", "Derrame Pleural", ("DERRAME",))])
    assert set(lex.surface_forms) == {"derrame pleural", "derrame"}


def test_match_index_entries(demo_index):
    entries = demo_index.entries()
    assert set(entries) == {("pleural", "effusion"), ("effusion",), ("chest",)}
    hit = entries[("pleural", "effusion")]
    assert (hit.term_id, hit.surface_form, hit.token_count) == ("RID1", "pleural effusion", 2)
    assert len(demo_index) == 3


def test_match_index_walk_yields_shortest_first():
    lex = Lexicon.from_terms([
        LexiconTerm("RID1", "right lower lobe"),
        LexiconTerm("RID2", "right"),
        LexiconTerm("RID3", "right lower"),
    ])
    idx = build_match_index(lex)
    hits = list(idx.walk(["right", "lower", "lobe"], 0))
    assert [h.token_count for h in hits] == [1, 2, 3]
    assert [h.term_id for h in hits] == ["RID2", "RID3", "RID1"]
    assert list(idx.walk(["lower", "lobe"], 0)) == []


def test_match_index_collapses_forms_with_same_token_sequence():
    lex = Lexicon.from_terms([
        LexiconTerm("RID9", "x ray"),
        LexiconTerm("RID5", "x-ray"),
    ])
    idx = build_match_index(lex)
    entries = idx.entries()
    assert set(entries) == {("x", "ray")}
    assert entries[("x", "ray")].term_id == "RID5"


def test_match_index_skips_unmatchable_forms():
    lex = Lexicon.from_terms([LexiconTerm("RID1", "chest", ("!!!",))])
    assert set(build_match_index(lex).entries()) == {("chest",)}


def test_entries_returns_a_copy(demo_index):
    demo_index.entries().clear()
    assert len(demo_index) == 3


def test_round_trip_inline():
    lex = parse_lexicon(GOOD)
    canon = serialize_lexicon(lex)
    assert parse_lexicon(canon) == lex
    # canonical order: by numeric id, so RID2 before RID7 before RID10
    ids = [line.split("\t")[0] for line in canon.splitlines()]
    assert ids == ["RID2", "RID7", "RID10"]


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_round_trip_random_lexicons(seed):
    lex = make_rng_lexicon(random.Random(seed), 40)
    assert parse_lexicon(serialize_lexicon(lex)) == lex


def test_sample_lexicon_is_clean():
    with open(SAMPLE_LEXICON, encoding="utf-8") as fh:
        text = fh.read()
    lex, issues = validate_lexicon(text)
    assert issues == []
    assert lex is not None
    assert len(lex) == 195
    assert parse_lexicon(serialize_lexicon(lex)) == lex
    for term in lex.terms.values():
        assert term.parent_id is None or term.parent_id in lex.terms
