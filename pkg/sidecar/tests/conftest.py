"""Shared fixtures for the sidecar suite: live servers on ephemeral ports."""

from __future__ import annotations

import sys
from pathlib import Path

import pytest

# Make the support helpers importable as a plain module from any test.
sys.path.insert(0, str(Path(__file__).parent))

from support_sidecar import running_server

from inference_sidecar.registry import ModelRegistry
from span_sleuth.backends import ENV_CACHE_DIR, ENV_LLM_ENDPOINT, ENV_LLM_KEY


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    """Tests must not inherit credentials, cache paths, or pinned clocks."""
    for var in (ENV_LLM_ENDPOINT, ENV_LLM_KEY, ENV_CACHE_DIR, "SOURCE_DATE_EPOCH"):
        monkeypatch.delenv(var, raising=False)


@pytest.fixture(scope="module")
def live_server():
    """Base URL of a fully loaded builtin-engine sidecar."""
    with running_server(ModelRegistry().load()) as base_url:
        yield base_url


@pytest.fixture(scope="module")
def partial_server():
    """Base URL of a sidecar loaded without the depparse capability."""
    with running_server(ModelRegistry({"capabilities": ["srl", "nli"]}).load()) as base_url:
        yield base_url
