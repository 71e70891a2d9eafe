"""Runtime configuration, read from MRA_* environment variables."""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from .store import DEFAULT_MAX_TEXT_BYTES, JOURNAL_FILENAME
from .translator import DEFAULT_LANGUAGES, LANGUAGE_PATTERN


class ConfigError(Exception):
    """Bad or missing configuration. Always names the offending variable."""

    def __init__(self, variable: str, message: str):
        super().__init__(f"{variable}: {message}")
        self.variable = variable


def _float_var(env: Mapping[str, str], var: str, default: float, *,
               minimum: float | None = None) -> float:
    raw = env.get(var)
    if raw is None or raw == "":
        return default
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(var, f"expected a number, got {raw!r}") from None
    if minimum is not None and value < minimum:
        raise ConfigError(var, f"must be >= {minimum}, got {raw!r}")
    return value


def _int_var(env: Mapping[str, str], var: str, default: int, *, minimum: int = 1) -> int:
    raw = env.get(var)
    if raw is None or raw == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(var, f"expected an integer, got {raw!r}") from None
    if value < minimum:
        raise ConfigError(var, f"must be >= {minimum}, got {raw!r}")
    return value


def _parse_languages(raw: str) -> tuple[str, ...]:
    parts = [p.strip() for p in raw.split(",")]
    langs: dict[str, None] = {}
    for part in parts:
        if not LANGUAGE_PATTERN.match(part):
            raise ConfigError("MRA_LANGS", f"bad language code {part!r} (want two lowercase letters)")
        if part == "en":
            raise ConfigError("MRA_LANGS", "en is always accepted and never translated; leave it out")
        langs[part] = None
    if not langs:
        raise ConfigError("MRA_LANGS", "no languages given")
    return tuple(langs)


@dataclass
class Settings:
    lexicon_path: Path | None = None
    data_dir: Path | None = None
    bind_host: str = "127.0.0.1"
    bind_port: int = 8080
    translator: str = "mock"
    translation_url: str | None = None
    translation_key: str | None = None
    mock_latency_secs: float = 0.0
    languages: tuple[str, ...] = DEFAULT_LANGUAGES
    workers: int = 4
    poll_secs: float = 2.0
    stall_mins: float = 15.0
    annotator: str = "local"
    annotator_url: str | None = None
    annotator_key: str | None = None
    ui_dir: Path | None = None
    max_text_bytes: int = DEFAULT_MAX_TEXT_BYTES

    @property
    def stall_secs(self) -> float:
        return self.stall_mins * 60.0

    @property
    def journal_path(self) -> Path:
        if self.data_dir is None:
            raise ConfigError("MRA_DATA_DIR", "not set")
        return self.data_dir / JOURNAL_FILENAME

    @classmethod
    def from_env(cls, env: Mapping[str, str] | None = None) -> "Settings":
        env = os.environ if env is None else env
        s = cls()
        if raw := env.get("MRA_LEXICON"):
            s.lexicon_path = Path(raw)
        if raw := env.get("MRA_DATA_DIR"):
            s.data_dir = Path(raw)
        if raw := env.get("MRA_BIND"):
            host, sep, port = raw.rpartition(":")
            if not sep or not host:
                raise ConfigError("MRA_BIND", f"expected host:port, got {raw!r}")
            try:
                s.bind_port = int(port)
            except ValueError:
                raise ConfigError("MRA_BIND", f"bad port in {raw!r}") from None
            s.bind_host = host
        if raw := env.get("MRA_TRANSLATOR"):
            if raw not in ("mock", "remote"):
                raise ConfigError("MRA_TRANSLATOR", f"expected mock or remote, got {raw!r}")
            s.translator = raw
        s.translation_url = env.get("MRA_TRANSLATION_URL") or None
        s.translation_key = env.get("MRA_TRANSLATION_KEY") or None
        s.mock_latency_secs = _float_var(env, "MRA_MOCK_LATENCY_SECS",
                                         s.mock_latency_secs, minimum=0.0)
        if raw := env.get("MRA_LANGS"):
            s.languages = _parse_languages(raw)
        s.workers = _int_var(env, "MRA_WORKERS", s.workers)
        s.poll_secs = _float_var(env, "MRA_POLL_SECS", s.poll_secs, minimum=0.01)
        s.stall_mins = _float_var(env, "MRA_STALL_MINS", s.stall_mins, minimum=0.01)
        if raw := env.get("MRA_ANNOTATOR"):
            if raw not in ("local", "remote"):
                raise ConfigError("MRA_ANNOTATOR", f"expected local or remote, got {raw!r}")
            s.annotator = raw
        s.annotator_url = env.get("MRA_ANNOTATOR_URL") or None
        s.annotator_key = env.get("MRA_ANNOTATOR_KEY") or None
        if raw := env.get("MRA_UI_DIR"):
            s.ui_dir = Path(raw)
        return s

    def validate_for_serve(self) -> None:
        """Everything `mra serve` needs up front, so it can fail fast."""
        if self.lexicon_path is None:
            raise ConfigError("MRA_LEXICON", "not set (path to the terminology TSV)")
        if self.data_dir is None:
            raise ConfigError("MRA_DATA_DIR", "not set (directory for the journal)")
        if self.translator == "remote":
            if not self.translation_url:
                raise ConfigError("MRA_TRANSLATION_URL", "required when MRA_TRANSLATOR=remote")
            if not self.translation_key:
                raise ConfigError("MRA_TRANSLATION_KEY", "required when MRA_TRANSLATOR=remote")
        if self.annotator == "remote":
            if not self.annotator_url:
                raise ConfigError("MRA_ANNOTATOR_URL", "required when MRA_ANNOTATOR=remote")
            if not self.annotator_key:
                raise ConfigError("MRA_ANNOTATOR_KEY", "required when MRA_ANNOTATOR=remote")
