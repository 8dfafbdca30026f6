"""Pytest wiring: offline-mode environment, checkpoint/corpus fixtures,
and the acceptance-gate line recorder."""

from __future__ import annotations

import os

# Everything in this suite must run without network access; checkpoints
# are built locally, so forbid hub lookups before transformers loads.
os.environ.setdefault("TRANSFORMERS_OFFLINE", "1")
os.environ.setdefault("HF_HUB_OFFLINE", "1")
os.environ.setdefault("TOKENIZERS_PARALLELISM", "false")

import pytest

from sidecar_fixtures import (
    build_tiny_bert,
    build_tiny_setmodel,
    make_word_corpus,
    write_dump,
    write_manifest,
)


@pytest.fixture
def dump_file(tmp_path):
    return write_dump(tmp_path / "dump.tsv")


@pytest.fixture
def manifest_file(tmp_path):
    return write_manifest(tmp_path / "manifest.tsv")


@pytest.fixture(scope="session")
def tiny_bert(tmp_path_factory) -> str:
    return build_tiny_bert(tmp_path_factory.mktemp("tiny_bert"))


@pytest.fixture(scope="session")
def tiny_setmodel(tmp_path_factory) -> str:
    return build_tiny_setmodel(tmp_path_factory.mktemp("tiny_setmodel"))


@pytest.fixture
def word_corpus(tmp_path):
    return make_word_corpus(tmp_path / "corpus")


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def acceptance_recorder():
    return _ACCEPTANCE_LINES.append


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance gate (neural encoders)")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
