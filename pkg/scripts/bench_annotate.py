#!/usr/bin/env python3
"""Rough throughput numbers for the dictionary matcher.

Builds a synthetic corpus out of the sample lexicon's own surface forms
mixed with filler words, then times annotate() over it. Useful when
poking at the tokenizer or the index; not a rigorous benchmark.
"""

import argparse
import random
import time
from pathlib import Path

from mra.annotator import annotate
from mra.lexicon import build_match_index, parse_lexicon

FILLER = ("shows", "with", "without", "no", "a", "small", "large", "the",
          "patient", "stable", "unchanged", "impression", "compatible")


def synth_corpus(lexicon, rng, docs, words_per_doc):
    surfaces = sorted({s for t in lexicon.terms.values() for s in t.surface_strings()})
    out = []
    for _ in range(docs):
        words = []
        while len(words) < words_per_doc:
            if rng.random() < 0.4:
                words.extend(rng.choice(surfaces).split())
            else:
                words.append(rng.choice(FILLER))
        out.append(" ".join(words) + ".")
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lexicon", type=Path,
                    default=Path(__file__).resolve().parent.parent / "data" / "sample_lexicon.tsv")
    ap.add_argument("--docs", type=int, default=2000)
    ap.add_argument("--words", type=int, default=120, help="words per document")
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    with open(args.lexicon, encoding="utf-8") as fh:
        lexicon = parse_lexicon(fh)

    t0 = time.perf_counter()
    index = build_match_index(lexicon)
    build_secs = time.perf_counter() - t0
    print(f"index: {len(lexicon.terms)} terms, {len(index)} entries, "
          f"built in {build_secs * 1000:.1f} ms")

    corpus = synth_corpus(lexicon, random.Random(args.seed), args.docs, args.words)
    chars = sum(len(d) for d in corpus)

    t0 = time.perf_counter()
    total = sum(len(annotate(doc, index)) for doc in corpus)
    secs = time.perf_counter() - t0
    print(f"{args.docs} docs, {chars} chars, {total} annotations")
    print(f"{secs:.2f} s total, {chars / secs / 1e6:.2f} Mchars/s, "
          f"{args.docs / secs:.0f} docs/s")


if __name__ == "__main__":
    main()
