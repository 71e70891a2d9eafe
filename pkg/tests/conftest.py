import pytest

from mra.api import Service, build_service
from mra.lexicon import Lexicon, LexiconTerm, build_match_index, parse_lexicon

from helpers import SAMPLE_LEXICON, make_settings


@pytest.fixture
def demo_lexicon() -> Lexicon:
    return Lexicon.from_terms([
        LexiconTerm("RID1", "pleural effusion"),
        LexiconTerm("RID2", "effusion"),
        LexiconTerm("RID3", "chest"),
    ])


@pytest.fixture
def demo_index(demo_lexicon):
    return build_match_index(demo_lexicon)


@pytest.fixture(scope="session")
def sample_lexicon() -> Lexicon:
    with open(SAMPLE_LEXICON, encoding="utf-8") as fh:
        return parse_lexicon(fh)


@pytest.fixture(scope="session")
def sample_index(sample_lexicon):
    return build_match_index(sample_lexicon)


@pytest.fixture
def make_service(tmp_path):
    """Factory for a wired Service on a fresh journal; stops them on teardown."""
    services: list[Service] = []
    counter = [0]

    def factory(*, start: bool = True, **overrides) -> Service:
        counter[0] += 1
        data_dir = tmp_path / f"svc{counter[0]}"
        settings = make_settings(data_dir, **overrides)
        service = build_service(settings)
        services.append(service)
        if start:
            service.start()
        return service

    yield factory
    for service in services:
        service.stop()
