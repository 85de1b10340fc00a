"""Deterministic in-process stand-ins for every backend service.

The mock sidecar answers the exact wire protocol of the real one
(``POST /v1/srl``, ``/v1/depparse``, ``/v1/nli``, ``GET /healthz``) from
small rule systems, so pipeline runs against it are reproducible down to the
byte and need no network. The mock chat transport does the same for the
chat-completion shape used by retrieval and verifier LLMs.

Mocks are selected by endpoint URL scheme, e.g. ``mock://sidecar``,
``mock://chat?mode=retrieval``, ``mock://chat?mode=verifier&confirm=all``,
``mock://dead``. Options arrive as query parameters.
"""

from __future__ import annotations

import re
from urllib.parse import parse_qsl, urlparse

from ..errors import BackendUnavailable

# Verbs the mock parser recognizes; enough to cover the bundled corpora.
MOCK_VERBS_EN = {
    "won", "wrote", "is", "was", "are", "were", "has", "have", "had",
    "discovered", "invented", "directed", "borders", "orbits", "painted",
    "composed", "founded", "lies", "flows", "erupted", "stars",
}
MOCK_VERBS_AR = {"فاز", "فازت", "ولد", "ولدت", "كتب", "كتبت", "تقع", "يقع", "اخترع", "اكتشفت", "اكتشف"}
_PREPOSITIONS = {"in", "at", "on", "during", "since", "from", "في", "منذ", "عام", "خلال"}
_YEAR_RE = re.compile(r"\b\d{3,4}\b")


def _clauses(text: str) -> list[str]:
    parts = re.split(r"[.!?؟;]+", text)
    return [p.strip() for p in parts if p.strip()]


def _is_verb(word: str) -> bool:
    w = word.strip(",.;:!?؟«»\"'()").lower()
    return w in MOCK_VERBS_EN or w in MOCK_VERBS_AR


def _is_prep(word: str) -> bool:
    return word.strip(",.;:!?؟«»\"'()").lower() in _PREPOSITIONS


def mock_srl_frames(text: str, lang: str) -> list[dict]:
    """One frame per clause containing a known verb.

    Pre-verb words become ARG0, post-verb words up to the first preposition
    ARG1, and each prepositional tail ARGM-TMP (if it contains a year-like
    number) or ARGM-LOC.
    """
    frames = []
    for clause in _clauses(text):
        words = clause.split()
        verb_at = next((i for i, w in enumerate(words) if _is_verb(w)), None)
        if verb_at is None:
            continue
        arguments = []
        if verb_at > 0:
            arguments.append({"role": "ARG0", "text": " ".join(words[:verb_at])})
        rest = words[verb_at + 1:]
        prep_at = next((i for i, w in enumerate(rest) if _is_prep(w)), len(rest))
        if prep_at > 0:
            arguments.append({"role": "ARG1", "text": " ".join(rest[:prep_at])})
        tail = rest[prep_at:]
        while tail:
            nxt = next((i for i, w in enumerate(tail[1:], start=1) if _is_prep(w)), len(tail))
            chunk = " ".join(tail[:nxt])
            role = "ARGM-TMP" if _YEAR_RE.search(chunk) else "ARGM-LOC"
            arguments.append({"role": role, "text": chunk})
            tail = tail[nxt:]
        frames.append({"predicate": words[verb_at].strip(",.;:!?؟"), "arguments": arguments})
    return frames


def mock_dep_nodes(text: str, lang: str) -> list[dict]:
    """Flat but well-formed dependency parse of the first clause.

    With a known verb: the verb is the root, the subject block hangs off it
    via ``nsubj`` (Arabic subjects sit after the verb, English before), the
    object block via ``obj``, and each prepositional tail via ``obl``.
    Without one: the first word is a nominal root and everything else is a
    flat ``mod`` — the downstream extractor reports a nominal sentence.
    """
    clauses = _clauses(text)
    words = clauses[0].split() if clauses else []
    words = [w.strip(",.;:!?؟«»\"'()") or w for w in words]
    if not words:
        return []
    n = len(words)
    verb_at = next((i for i, w in enumerate(words) if _is_verb(w)), None)

    def node(i, pos, head, rel):
        return {"index": i + 1, "form": words[i], "pos": pos, "head": head, "rel": rel}

    if verb_at is None:
        nodes = [node(0, "NOUN", 0, "root")]
        nodes += [node(i, "NOUN", 1, "mod") for i in range(1, n)]
        return nodes

    nodes: list[dict] = [None] * n  # type: ignore[list-item]
    nodes[verb_at] = node(verb_at, "VERB", 0, "root")
    root = verb_at + 1

    if lang.upper() == "AR":
        subj = [verb_at + 1] if verb_at + 1 < n else []
        pre = list(range(verb_at))
        post_start = verb_at + 2
    else:
        subj = list(range(verb_at))
        pre = []
        post_start = verb_at + 1
    if subj:
        head_i = subj[0]
        nodes[head_i] = node(head_i, "NOUN", root, "nsubj")
        for i in subj[1:]:
            nodes[i] = node(i, "NOUN", head_i + 1, "flat")
    for i in pre:
        nodes[i] = node(i, "X", root, "mod")

    rest = list(range(post_start, n))
    prep_at = next((k for k, i in enumerate(rest) if _is_prep(words[i])), len(rest))
    obj = rest[:prep_at]
    if obj:
        head_i = obj[0]
        nodes[head_i] = node(head_i, "NOUN", root, "obj")
        for i in obj[1:]:
            nodes[i] = node(i, "NOUN", head_i + 1, "flat")
    tail = rest[prep_at:]
    while tail:
        nxt = next((k for k, i in enumerate(tail[1:], start=1) if _is_prep(words[i])), len(tail))
        head_i = tail[0]
        pos = "ADP" if _is_prep(words[head_i]) else "NOUN"
        nodes[head_i] = node(head_i, pos, root, "obl")
        for i in tail[1:nxt]:
            nodes[i] = node(i, "NUM" if words[i].isdigit() else "NOUN", head_i + 1, "flat")
        tail = tail[nxt:]
    return [nd for nd in nodes if nd is not None]


_WORD_RE = re.compile(r"\w+", re.UNICODE)


def mock_nli_triple(premise: str, hypothesis: str) -> dict:
    """Deterministic entailment triple.

    Contract: a hypothesis that appears verbatim (modulo whitespace) inside
    the premise is entailed with probability 1. Otherwise the verdict comes
    from content-word overlap: mostly-shared vocabulary reads as neutral,
    mostly-novel vocabulary as contradiction.
    """
    p = " ".join(premise.split()).lower()
    h = " ".join(hypothesis.split()).lower()
    if h and h in p:
        return {"entailment": 1.0, "neutral": 0.0, "contradiction": 0.0}
    premise_words = set(_WORD_RE.findall(p))
    content = [w for w in _WORD_RE.findall(h) if len(w) > 3 or w.isdigit()]
    if not content:
        return {"entailment": 0.1, "neutral": 0.8, "contradiction": 0.1}
    overlap = sum(1 for w in content if w in premise_words) / len(content)
    if overlap >= 0.5:
        return {"entailment": 0.05, "neutral": 0.85, "contradiction": 0.1}
    return {"entailment": 0.02, "neutral": 0.08, "contradiction": 0.9}


class MockSidecarTransport:
    """In-process implementation of the sidecar wire protocol."""

    def __init__(self, dead: bool = False, fail_contains: str | None = None):
        self.dead = dead
        self.fail_contains = fail_contains

    def _gate(self, text: str):
        if self.dead:
            raise BackendUnavailable("mock sidecar configured dead")
        if self.fail_contains and self.fail_contains in text:
            raise BackendUnavailable(f"mock sidecar poisoned on {self.fail_contains!r}")

    def post(self, path: str, body: dict) -> tuple[int, dict]:
        self._gate(str(body.get("text", "")) + str(body.get("premise", "")))
        if path == "/v1/srl":
            if not isinstance(body.get("text"), str) or not isinstance(body.get("lang"), str):
                return 422, {"error": "body must be {text, lang}"}
            return 200, {"frames": mock_srl_frames(body["text"], body["lang"])}
        if path == "/v1/depparse":
            if not isinstance(body.get("text"), str) or not isinstance(body.get("lang"), str):
                return 422, {"error": "body must be {text, lang}"}
            return 200, {"nodes": mock_dep_nodes(body["text"], body["lang"])}
        if path == "/v1/nli":
            if not isinstance(body.get("premise"), str) or not isinstance(body.get("hypothesis"), str):
                return 422, {"error": "body must be {premise, hypothesis}"}
            return 200, mock_nli_triple(body["premise"], body["hypothesis"])
        return 404, {"error": f"unknown path {path}"}

    def get(self, path: str) -> tuple[int, dict]:
        if self.dead:
            raise BackendUnavailable("mock sidecar configured dead")
        if path == "/healthz":
            return 200, {"status": "ok", "models": ["mock-srl", "mock-depparse", "mock-nli"]}
        return 404, {"error": f"unknown path {path}"}


class MockChatTransport:
    """Chat-completion endpoint with scripted deterministic behavior.

    Modes: ``retrieval`` answers every prompt with a pseudo reference
    passage; ``verifier`` answers with a leading judgment keyword, either a
    blanket policy (``confirm`` = all / none) or per-span lookup ``table``
    (longest key found in the prompt wins); ``echo`` returns the prompt.
    """

    def __init__(
        self,
        mode: str = "retrieval",
        confirm: str | None = None,
        table: dict[str, str] | None = None,
        fail_contains: str | None = None,
        dead: bool = False,
    ):
        self.mode = mode
        self.confirm = confirm
        self.table = table or {}
        self.fail_contains = fail_contains
        self.dead = dead

    def _reply(self, prompt: str) -> str:
        if self.mode == "retrieval":
            return f"Reference passage: {prompt}"
        if self.mode == "verifier":
            if self.confirm == "all":
                return "HALLUCINATION: the flagged span is unsupported by the reference."
            if self.confirm == "none":
                return "SUPPORTED: the flagged span is consistent with the reference."
            for key in sorted(self.table, key=len, reverse=True):
                if key in prompt:
                    return self.table[key]
            return "UNSURE: no scripted judgment for this span."
        return prompt

    def post(self, path: str, body: dict) -> tuple[int, dict]:
        if self.dead:
            raise BackendUnavailable("mock chat backend configured dead")
        messages = body.get("messages")
        if not isinstance(messages, list) or not messages:
            return 422, {"error": "body must contain non-empty messages"}
        prompt = str(messages[-1].get("content", ""))
        if self.fail_contains and self.fail_contains in prompt:
            raise BackendUnavailable(f"mock chat backend poisoned on {self.fail_contains!r}")
        return 200, {"choices": [{"message": {"role": "assistant", "content": self._reply(prompt)}}]}

    def get(self, path: str) -> tuple[int, dict]:
        if self.dead:
            raise BackendUnavailable("mock chat backend configured dead")
        return 200, {"status": "ok", "models": [f"mock-chat-{self.mode}"]}


def make_mock_transport(endpoint: str):
    """Build a mock transport from a ``mock://...`` endpoint URL."""
    parsed = urlparse(endpoint)
    options = dict(parse_qsl(parsed.query))
    kind = parsed.netloc or parsed.path.lstrip("/")
    dead = options.get("dead") == "1" or kind == "dead"
    if kind == "dead":
        return MockSidecarTransport(dead=True)
    if kind == "sidecar":
        return MockSidecarTransport(dead=dead, fail_contains=options.get("fail_contains"))
    if kind == "chat":
        table = None
        if "table" in options:
            import json
            from pathlib import Path

            table = json.loads(Path(options["table"]).read_text(encoding="utf-8"))
        return MockChatTransport(
            mode=options.get("mode", "retrieval"),
            confirm=options.get("confirm"),
            table=table,
            fail_contains=options.get("fail_contains"),
            dead=dead,
        )
    raise ValueError(f"unknown mock endpoint {endpoint!r}")
