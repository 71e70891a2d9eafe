"""Command line: serve the API, annotate files offline, check lexicons.

Exit codes: 2 for configuration problems, 3 for lexicon problems, 4 for
unreadable input text.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import uvicorn

from .annotator import annotate, annotation_to_dict
from .api import build_app, build_service
from .config import ConfigError, Settings
from .lexicon import LexiconError, build_match_index, parse_lexicon, validate_lexicon

EXIT_CONFIG = 2
EXIT_LEXICON = 3
EXIT_UNREADABLE = 4


@click.group()
def main():
    """Multilingual report annotator."""


def _load_lexicon(path: Path):
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_lexicon(fh)
    except LexiconError as exc:
        click.echo(f"lexicon error: {path}: {exc}", err=True)
        sys.exit(EXIT_LEXICON)
    except (OSError, UnicodeDecodeError) as exc:
        click.echo(f"lexicon error: {exc}", err=True)
        sys.exit(EXIT_LEXICON)


@main.command()
def serve():
    """Run the API server and the processing pipeline.

    Configured entirely through MRA_* environment variables; MRA_LEXICON
    and MRA_DATA_DIR are required.
    """
    try:
        settings = Settings.from_env()
        settings.validate_for_serve()
    except ConfigError as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    try:
        service = build_service(settings)
    except LexiconError as exc:
        click.echo(f"lexicon error: {settings.lexicon_path}: {exc}", err=True)
        sys.exit(EXIT_LEXICON)
    except (OSError, UnicodeDecodeError) as exc:
        click.echo(f"lexicon error: {exc}", err=True)
        sys.exit(EXIT_LEXICON)
    app = build_app(service)
    service.start()
    try:
        uvicorn.run(app, host=settings.bind_host, port=settings.bind_port,
                    log_level="warning")
    finally:
        service.stop()


@main.command("annotate")
@click.option("--lexicon", "lexicon_path", required=True,
              type=click.Path(path_type=Path), help="Terminology TSV file.")
@click.option("--in", "input_path", required=True,
              type=click.Path(path_type=Path), help="UTF-8 text file to annotate.")
@click.option("--format", "fmt", type=click.Choice(["tsv", "ndjson"]),
              default="tsv", show_default=True)
def annotate_file(lexicon_path: Path, input_path: Path, fmt: str):
    """Annotate one text file and print the matches."""
    lexicon = _load_lexicon(lexicon_path)
    try:
        text = input_path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        click.echo(f"cannot read {input_path}: {exc}", err=True)
        sys.exit(EXIT_UNREADABLE)
    index = build_match_index(lexicon)
    for ann in annotate(text, index):
        if fmt == "tsv":
            click.echo(f"{ann.start}\t{ann.end}\t{ann.term_id}\t{ann.matched_text}")
        else:
            click.echo(json.dumps(annotation_to_dict(ann), ensure_ascii=False))


@main.group()
def lexicon():
    """Lexicon file utilities."""


@lexicon.command("validate")
@click.argument("path", type=click.Path(path_type=Path))
def lexicon_validate(path: Path):
    """Check a lexicon file, reporting every problem it has."""
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        click.echo(f"cannot read {path}: {exc}", err=True)
        sys.exit(EXIT_LEXICON)
    parsed, issues = validate_lexicon(text)
    if issues:
        for issue in issues:
            click.echo(f"{path}:{issue.line}: {issue.message}", err=True)
        click.echo(f"{len(issues)} problem(s) found", err=True)
        sys.exit(EXIT_LEXICON)
    assert parsed is not None
    click.echo(f"{len(parsed.terms)} terms, {len(parsed.surface_forms)} surface forms")
