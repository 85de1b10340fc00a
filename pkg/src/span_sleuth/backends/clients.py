"""Typed clients for the model services the pipeline depends on.

Two client families share the caching/retry machinery:

* :class:`SidecarClient` talks the sidecar wire protocol — ``POST /v1/srl``,
  ``/v1/depparse`` and ``/v1/nli`` plus ``GET /healthz``.
* :class:`ChatClient` talks a chat-completion endpoint and carries the
  versioned prompt templates for context retrieval and span verification.

Every operation is cached by content digest (see ``cache.py``), concurrent
identical requests are de-duplicated to one network call, and transient
failures are retried with exponential backoff before surfacing as
BackendUnavailable.
"""

from __future__ import annotations

import os
import threading
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from ..errors import (
    BackendProtocolError,
    BackendUnavailable,
    EmptyContext,
)
from .cache import KeyedLocks, ResponseCache, backoff_sleep, cache_key, now_iso, sha256_text
from .mocks import make_mock_transport
from .transport import FixtureOnlyTransport, HttpTransport, Transport

ENV_LLM_ENDPOINT = "SPAN_SLEUTH_LLM_ENDPOINT"
ENV_LLM_KEY = "SPAN_SLEUTH_LLM_KEY"
ENV_CACHE_DIR = "SPAN_SLEUTH_CACHE_DIR"

# Versioned prompt templates. The template text is configuration, not a
# model fact: edits must bump the version so cache keys change with it.
RETRIEVAL_PROMPT_VERSION = "retrieval-v1"
RETRIEVAL_PROMPT = (
    "Provide a concise factual reference passage, with key facts, that answers: "
    "{question}. Answer in {language}."
)
VERIFIER_PROMPT_VERSION = "verifier-v1"
VERIFIER_PROMPT = (
    "You are fact-checking one span of a model-generated answer.\n"
    "Question: {question}\n"
    "Reference context: {context}\n"
    "Flagged span: \"{span}\"\n"
    "Is the flagged span a hallucination (unsupported by or contradicting the "
    "reference)? Reply with a single leading keyword: HALLUCINATION, SUPPORTED, "
    "or UNSURE, followed by a one-sentence reason."
)

LANGUAGE_NAMES = {"EN": "English", "AR": "Arabic"}

ENTAILMENT_LABELS = ("entailment", "neutral", "contradiction")

JUDGMENT_CONFIRMED = "confirmed-hallucination"
JUDGMENT_REFUTED = "refuted"
JUDGMENT_UNSURE = "unsure"


@dataclass(frozen=True)
class EntailmentVerdict:
    """Normalized (entailment, neutral, contradiction) probability triple."""

    p_entail: float
    p_neutral: float
    p_contra: float
    label: str

    @classmethod
    def from_raw(cls, entailment, neutral, contradiction) -> "EntailmentVerdict":
        """Build a verdict from raw model output.

        Accepts fractions or percentages (a triple summing to ~100 is read
        as percents and divided by 100 at this boundary). Triples that do
        not sum to 1 after that are renormalized; renormalization is a no-op
        when the sum is already 1 within 1e-6. Ties pick the label earliest
        in (entailment, neutral, contradiction) order.
        """
        try:
            values = [float(entailment), float(neutral), float(contradiction)]
        except (TypeError, ValueError):
            raise BackendProtocolError(
                f"entailment triple is not numeric: {(entailment, neutral, contradiction)!r}"
            ) from None
        if any(v != v or v < 0 for v in values):
            raise BackendProtocolError(f"entailment triple not normalizable: {values}")
        total = sum(values)
        if 99.0 <= total <= 101.0:
            values = [v / 100.0 for v in values]
            total = sum(values)
        if total <= 0 or total != total or total == float("inf"):
            raise BackendProtocolError(f"entailment triple not normalizable: {values}")
        if abs(total - 1.0) > 1e-6:
            values = [v / total for v in values]
        best = max(range(3), key=lambda i: (values[i], -i))
        return cls(
            p_entail=values[0],
            p_neutral=values[1],
            p_contra=values[2],
            label=ENTAILMENT_LABELS[best],
        )

    def as_triple(self) -> tuple[float, float, float]:
        return (self.p_entail, self.p_neutral, self.p_contra)


@dataclass(frozen=True)
class ContextDocument:
    """Reference passage retrieved for one question."""

    question_id: str
    text: str
    source: str
    retrieved_at: str


@dataclass(frozen=True)
class VerificationVerdict:
    """One verifier's judgment on one flagged span."""

    verifier: str
    span_text: str
    judgment: str
    rationale: str


@dataclass
class SrlFrame:
    """One predicate with its labeled arguments, in answer order."""

    predicate: str
    arguments: list[tuple[str, str]] = field(default_factory=list)


@dataclass
class BackendConfig:
    """Connection, caching, and prompt settings for one backend service."""

    endpoint: str
    model_name: str = ""
    timeout: float = 30.0
    max_retries: int = 2
    cache_dir: Optional[str] = None
    temperature: Optional[float] = None
    retry_backoff: float = 0.25

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError(f"timeout must be positive, got {self.timeout}")
        if self.max_retries < 0:
            raise ValueError(f"max_retries must be >= 0, got {self.max_retries}")

    def with_env_overrides(self) -> "BackendConfig":
        """Apply credential/endpoint environment overrides."""
        cfg = self
        env_endpoint = os.environ.get(ENV_LLM_ENDPOINT)
        if env_endpoint and cfg.endpoint in ("", "env"):
            cfg = replace(cfg, endpoint=env_endpoint)
        if cfg.cache_dir is None and os.environ.get(ENV_CACHE_DIR):
            cfg = replace(cfg, cache_dir=os.environ[ENV_CACHE_DIR])
        return cfg


def parse_judgment(reply: str) -> tuple[str, str]:
    """Map a verifier reply to a judgment via its leading keyword.

    Chatty or off-script replies map to unsure, with the raw reply kept as
    rationale.
    """
    stripped = reply.strip()
    head = stripped.split(None, 1)[0].strip(":.,!*#\"'`") if stripped else ""
    head = head.upper()
    if head == "HALLUCINATION":
        return JUDGMENT_CONFIRMED, stripped
    if head == "SUPPORTED":
        return JUDGMENT_REFUTED, stripped
    if head == "UNSURE":
        return JUDGMENT_UNSURE, stripped
    return JUDGMENT_UNSURE, stripped


def make_transport(config: BackendConfig, fixture_mode: bool = False) -> Transport:
    """Resolve a config endpoint into a transport.

    ``mock://`` endpoints are in-process and always allowed; http(s)
    endpoints become fixture-only refusals when fixture mode forbids live
    calls.
    """
    endpoint = config.endpoint
    if endpoint.startswith("mock://"):
        return make_mock_transport(endpoint)
    if fixture_mode:
        return FixtureOnlyTransport(endpoint)
    headers = {}
    api_key = os.environ.get(ENV_LLM_KEY)
    if api_key:
        headers["Authorization"] = f"Bearer {api_key}"
    return HttpTransport(endpoint, timeout=config.timeout, headers=headers)


class _BaseClient:
    """Cache + retry + in-flight-dedup core shared by both client kinds."""

    def __init__(
        self,
        config: BackendConfig,
        transport: Optional[Transport] = None,
        cache: Optional[ResponseCache] = None,
        fixture_mode: bool = False,
    ):
        self.config = config.with_env_overrides()
        self.transport = transport if transport is not None else make_transport(
            self.config, fixture_mode
        )
        if cache is not None:
            self.cache = cache
        else:
            cache_dir = self.config.cache_dir
            self.cache = ResponseCache(Path(cache_dir) if cache_dir else None)
        self._locks = KeyedLocks()
        self._stats_lock = threading.Lock()
        self.stats: Counter = Counter()

    def _count(self, what: str) -> None:
        with self._stats_lock:
            self.stats[what] += 1

    def _cached_call(self, key: str, fetch) -> dict:
        self._count("requests")
        body = self.cache.get(key)
        if body is not None:
            self._count("cache_hits")
            return body
        with self._locks.lock(key):
            body = self.cache.get(key)
            if body is not None:
                self._count("cache_hits")
                return body
            body = fetch()
            self.cache.put(key, body)
            return body

    def _post_with_retries(self, path: str, body: dict) -> dict:
        attempts = self.config.max_retries + 1
        last_error: Exception | None = None
        for attempt in range(attempts):
            if attempt > 0:
                backoff_sleep(attempt - 1, self.config.retry_backoff)
            try:
                status, payload = self.transport.post(path, body)
            except BackendUnavailable as exc:
                last_error = exc
                continue
            if status >= 500:
                last_error = BackendUnavailable(f"POST {path} returned HTTP {status}")
                continue
            if status >= 400:
                raise BackendProtocolError(
                    f"POST {path} rejected with HTTP {status}: {payload.get('error', payload)}"
                )
            self._count("network_calls")
            return payload
        raise BackendUnavailable(
            f"POST {path} failed after {attempts} attempt(s): {last_error}"
        )


class SidecarClient(_BaseClient):
    """Client for SRL, dependency-parse, and NLI capabilities."""

    def srl_parse(self, text: str, lang: str) -> list[SrlFrame]:
        """Role frames for ``text``, in answer order. Blank input has no
        frames and never reaches the backend."""
        if not text.strip():
            return []
        key = self.srl_key(text, lang, self.config.model_name)
        body = self._cached_call(
            key, lambda: self._post_with_retries("/v1/srl", {"text": text, "lang": lang})
        )
        raw_frames = body.get("frames")
        if not isinstance(raw_frames, list):
            raise BackendProtocolError("SRL response missing 'frames' array")
        frames = []
        for i, raw in enumerate(raw_frames):
            try:
                arguments = [(a["role"], a["text"]) for a in raw.get("arguments", [])]
                frames.append(SrlFrame(predicate=raw["predicate"], arguments=arguments))
            except (TypeError, KeyError) as exc:
                raise BackendProtocolError(f"malformed SRL frame {i}: {exc}") from None
        return frames

    def dep_parse(self, text: str, lang: str) -> list[dict]:
        """Raw dependency nodes; the decompose module builds the tree."""
        if not text.strip():
            return []
        key = self.depparse_key(text, lang, self.config.model_name)
        body = self._cached_call(
            key, lambda: self._post_with_retries("/v1/depparse", {"text": text, "lang": lang})
        )
        nodes = body.get("nodes")
        if not isinstance(nodes, list):
            raise BackendProtocolError("dependency response missing 'nodes' array")
        return nodes

    def entail(self, context: str, hypothesis: str) -> EntailmentVerdict:
        """Entailment verdict for one (premise=context, hypothesis=unit) pair."""
        if not hypothesis.strip():
            raise ValueError("hypothesis must be non-empty")
        key = self.nli_key(context, hypothesis, self.config.model_name)
        body = self._cached_call(
            key,
            lambda: self._post_with_retries(
                "/v1/nli", {"premise": context, "hypothesis": hypothesis}
            ),
        )
        try:
            return EntailmentVerdict.from_raw(
                body["entailment"], body["neutral"], body["contradiction"]
            )
        except KeyError as exc:
            raise BackendProtocolError(f"NLI response missing {exc}") from None

    def healthz(self) -> dict:
        status, body = self.transport.get("/healthz")
        if status != 200:
            raise BackendUnavailable(f"healthz returned HTTP {status}")
        return body

    # Key recipes are part of the fixture contract; see cache.py.
    @staticmethod
    def srl_key(text: str, lang: str, model: str) -> str:
        return cache_key("v1/srl", {"text": text, "lang": lang, "model": model})

    @staticmethod
    def depparse_key(text: str, lang: str, model: str) -> str:
        return cache_key("v1/depparse", {"text": text, "lang": lang, "model": model})

    @staticmethod
    def nli_key(premise: str, hypothesis: str, model: str) -> str:
        return cache_key(
            "v1/nli",
            {"premise_sha256": sha256_text(premise), "hypothesis": hypothesis, "model": model},
        )


class ChatClient(_BaseClient):
    """Client for chat-completion LLM backends (retrieval and verifiers)."""

    chat_path = "/v1/chat/completions"

    def _complete(self, prompt: str) -> str:
        body = {
            "model": self.config.model_name,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.config.temperature if self.config.temperature is not None else 0.0,
        }
        payload = self._post_with_retries(self.chat_path, body)
        try:
            content = payload["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError):
            raise BackendProtocolError("chat response missing choices[0].message.content") from None
        if not isinstance(content, str):
            raise BackendProtocolError("chat message content is not a string")
        return content

    def retrieve_context(self, question: str, lang: str) -> ContextDocument:
        """Reference passage for a question, cached by question and prompt
        version. Blank model output raises EmptyContext and is not cached."""
        key = self.retrieval_key(question, lang, self.config.model_name)

        def fetch() -> dict:
            prompt = RETRIEVAL_PROMPT.format(
                question=question, language=LANGUAGE_NAMES.get(lang.upper(), lang)
            )
            text = self._complete(prompt)
            if not text.strip():
                raise EmptyContext(f"retrieval model returned blank context for {question!r}")
            return {"text": text, "retrieved_at": now_iso()}

        body = self._cached_call(key, fetch)
        text = body.get("text", "")
        if not isinstance(text, str) or not text.strip():
            raise EmptyContext(f"cached context for {question!r} is blank")
        return ContextDocument(
            question_id=key,
            text=text,
            source=f"{self.config.model_name}@{self.config.endpoint}",
            retrieved_at=str(body.get("retrieved_at", "")),
        )

    def verify_span(
        self, question: str, span_text: str, context_text: Optional[str] = None
    ) -> VerificationVerdict:
        """One fact-check judgment for a flagged span."""
        if not span_text.strip():
            raise ValueError("span_text must be non-empty")
        verifier_id = self.verifier_id()
        key = self.verify_key(question, span_text, verifier_id)

        def fetch() -> dict:
            prompt = VERIFIER_PROMPT.format(
                question=question,
                context=context_text if context_text else "(no reference context available)",
                span=span_text,
            )
            return {"reply": self._complete(prompt)}

        body = self._cached_call(key, fetch)
        judgment, rationale = parse_judgment(str(body.get("reply", "")))
        return VerificationVerdict(
            verifier=verifier_id, span_text=span_text, judgment=judgment, rationale=rationale
        )

    def verifier_id(self) -> str:
        return self.config.model_name or self.config.endpoint

    @staticmethod
    def retrieval_key(question: str, lang: str, model: str) -> str:
        return cache_key(
            "retrieve_context",
            {
                "question": question,
                "lang": lang,
                "model": model,
                "prompt_version": RETRIEVAL_PROMPT_VERSION,
            },
        )

    @staticmethod
    def verify_key(question: str, span_text: str, verifier: str) -> str:
        return cache_key(
            "verify_span",
            {
                "question": question,
                "span": span_text,
                "verifier": verifier,
                "prompt_version": VERIFIER_PROMPT_VERSION,
            },
        )
