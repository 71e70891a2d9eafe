"""Shared plumbing for the test suite."""

from __future__ import annotations

import time
from pathlib import Path
from typing import Callable

from mra.config import Settings

SAMPLE_LEXICON = Path(__file__).resolve().parent.parent / "data" / "sample_lexicon.tsv"


def wait_until(predicate: Callable[[], bool], timeout: float = 15.0,
               interval: float = 0.02) -> bool:
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        if predicate():
            return True
        time.sleep(interval)
    return predicate()


def make_settings(data_dir: Path, **overrides) -> Settings:
    """Settings tuned for fast in-process tests."""
    base = dict(
        lexicon_path=SAMPLE_LEXICON,
        data_dir=data_dir,
        workers=2,
        poll_secs=0.02,
        stall_mins=0.5,
        mock_latency_secs=0.0,
    )
    base.update(overrides)
    return Settings(**base)
