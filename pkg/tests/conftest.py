from __future__ import annotations

from pathlib import Path

import pytest

from charvoice import (
    Corpus,
    IngestSchema,
    Novel,
    Role,
    RoleThresholds,
    filter_corpus,
    filter_speakers,
    load_corpus,
    load_novel,
)
from helpers import FIXTURES, make_voice_corpus

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_recorder():
    """Collects acceptance-gate status lines for the terminal summary,
    which pytest writes outside output capture."""
    return _ACCEPTANCE_LINES.append


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance gate")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def pdnc_schema() -> IngestSchema:
    from importlib import resources

    ref = resources.files("charvoice") / "schemas" / "pdnc.schema"
    with resources.as_file(ref) as path:
        return IngestSchema.from_file(path)


@pytest.fixture(scope="session")
def spans_schema() -> IngestSchema:
    return IngestSchema.from_file(FIXTURES / "spans.schema")


@pytest.fixture()
def fixture_corpus_root() -> Path:
    return FIXTURES / "fixture_corpus"


@pytest.fixture()
def bundles_corpus_root() -> Path:
    return FIXTURES / "bundles_corpus"


@pytest.fixture()
def spans_corpus_root() -> Path:
    return FIXTURES / "spans_corpus"


@pytest.fixture(scope="session")
def bundle_thresholds() -> RoleThresholds:
    return RoleThresholds(intermediate_min=3, major_min=8)


@pytest.fixture()
def ashford(pdnc_schema, bundle_thresholds) -> Novel:
    """The hand-enumerable novel, filtered to intermediate+ characters
    (drops cora, keeps alice/bert/dan)."""
    novel = load_novel(FIXTURES / "bundles_corpus" / "ashford", pdnc_schema, bundle_thresholds)
    return filter_speakers(novel, Role.INTERMEDIATE)


@pytest.fixture(scope="session")
def voice_corpus_root(tmp_path_factory) -> Path:
    root = tmp_path_factory.mktemp("voice_corpus")
    return make_voice_corpus(root)


@pytest.fixture(scope="session")
def voice_corpus(voice_corpus_root, pdnc_schema) -> Corpus:
    corpus = load_corpus(voice_corpus_root, pdnc_schema)
    return filter_corpus(corpus, Role.INTERMEDIATE)
