"""Multilingual report annotator.

Reports come in, get machine-translated to English when needed, and are
annotated against a terminology lexicon.  Everything downstream (API, CLI,
web UI) reads from the same append-only journal.
"""

__version__ = "0.1.0"
