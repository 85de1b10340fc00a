"""Pluggable model backends: transports, caching, and typed clients."""

from .cache import (
    KeyedLocks,
    ResponseCache,
    cache_key,
    canonical_json,
    now_iso,
    sha256_text,
)
from .clients import (
    ENV_CACHE_DIR,
    ENV_LLM_ENDPOINT,
    ENV_LLM_KEY,
    RETRIEVAL_PROMPT_VERSION,
    VERIFIER_PROMPT_VERSION,
    BackendConfig,
    ChatClient,
    ContextDocument,
    EntailmentVerdict,
    JUDGMENT_CONFIRMED,
    JUDGMENT_REFUTED,
    JUDGMENT_UNSURE,
    SidecarClient,
    SrlFrame,
    VerificationVerdict,
    make_transport,
    parse_judgment,
)
from .transport import CountingTransport, FixtureOnlyTransport, HttpTransport, Transport
from .mocks import MockChatTransport, MockSidecarTransport, make_mock_transport

__all__ = [
    "BackendConfig",
    "ChatClient",
    "ContextDocument",
    "CountingTransport",
    "ENV_CACHE_DIR",
    "ENV_LLM_ENDPOINT",
    "ENV_LLM_KEY",
    "EntailmentVerdict",
    "FixtureOnlyTransport",
    "HttpTransport",
    "JUDGMENT_CONFIRMED",
    "JUDGMENT_REFUTED",
    "JUDGMENT_UNSURE",
    "KeyedLocks",
    "MockChatTransport",
    "MockSidecarTransport",
    "RETRIEVAL_PROMPT_VERSION",
    "ResponseCache",
    "SidecarClient",
    "SrlFrame",
    "Transport",
    "VERIFIER_PROMPT_VERSION",
    "VerificationVerdict",
    "cache_key",
    "canonical_json",
    "make_mock_transport",
    "make_transport",
    "now_iso",
    "parse_judgment",
    "sha256_text",
]
