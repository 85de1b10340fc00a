"""Shared fixtures: bundled corpus, mock-backed configs, environment hygiene."""

from __future__ import annotations

import sys
from pathlib import Path

import pytest

TESTS_DIR = Path(__file__).parent
DATA_DIR = TESTS_DIR / "data"

# Make the oracle helpers importable as a plain module from any test.
sys.path.insert(0, str(TESTS_DIR))

from span_sleuth.backends import ENV_CACHE_DIR, ENV_LLM_ENDPOINT, ENV_LLM_KEY
from span_sleuth.corpus import load_corpus
from span_sleuth.detect import PipelineConfig


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    """Tests must not inherit credentials, cache paths, or pinned clocks."""
    for var in (ENV_LLM_ENDPOINT, ENV_LLM_KEY, ENV_CACHE_DIR, "SOURCE_DATE_EPOCH"):
        monkeypatch.delenv(var, raising=False)


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def fixture_corpus_path() -> Path:
    return DATA_DIR / "fixture_corpus.jsonl"


@pytest.fixture()
def fixture_records(fixture_corpus_path):
    records, failures = load_corpus(fixture_corpus_path)
    assert not failures
    return records


@pytest.fixture()
def petra_record(fixture_records):
    return next(r for r in fixture_records if r.id == "en-001")


@pytest.fixture(scope="session")
def mock_config_path() -> Path:
    return DATA_DIR / "mock_config.yaml"


@pytest.fixture()
def mock_config() -> PipelineConfig:
    """All-mock pipeline config, independent of the YAML file."""
    return PipelineConfig()
