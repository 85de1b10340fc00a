"""Wire-protocol conformance suite for sidecar implementations.

The same checks run against the in-process mocks and a live service: any
transport that exposes ``post``/``get`` can be probed. Checks are protocol-
level (shapes, status codes, normalization, determinism), never semantic —
two conformant backends may disagree about language, but not about the
contract.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .decompose import DependencyTree

SAMPLE_TEXT = (
    "Petra van Stoveren won a silver medal in the 2008 Summer Olympics in Beijing, China."
)
SAMPLE_PREMISE = (
    "Petra van Stoveren won a bronze medal in the 2024 Summer Olympics in Paris, France."
)
SAMPLE_HYPOTHESIS = "in the 2008 Summer Olympics in Beijing, China"

NLI_KEYS = ("entailment", "neutral", "contradiction")


@dataclass(frozen=True)
class ConformanceCheck:
    """Outcome of one protocol probe."""

    name: str
    ok: bool
    detail: str = ""


def _check(name: str, probe: Callable[[], str]) -> ConformanceCheck:
    try:
        detail = probe()
    except Exception as exc:  # noqa: BLE001 - a conformance probe must never raise
        return ConformanceCheck(name=name, ok=False, detail=f"{type(exc).__name__}: {exc}")
    return ConformanceCheck(name=name, ok=True, detail=detail)


def _expect(condition: bool, message: str) -> None:
    if not condition:
        raise AssertionError(message)


def run_conformance(transport, lang: str = "EN") -> list[ConformanceCheck]:
    """Probe a transport for protocol conformance; one result per check."""

    def healthz() -> str:
        status, body = transport.get("/healthz")
        _expect(status == 200, f"expected 200, got {status}")
        _expect(body.get("status") == "ok", f"status field is {body.get('status')!r}")
        models = body.get("models")
        _expect(isinstance(models, list) and models, "models must be a non-empty list")
        _expect(all(isinstance(m, str) for m in models), "models must be strings")
        return f"models: {', '.join(models)}"

    def srl_shape() -> str:
        status, body = transport.post("/v1/srl", {"text": SAMPLE_TEXT, "lang": lang})
        _expect(status == 200, f"expected 200, got {status}")
        frames = body.get("frames")
        _expect(isinstance(frames, list), "frames must be a list")
        _expect(len(frames) >= 1, "sample sentence must yield at least one frame")
        for frame in frames:
            _expect(isinstance(frame.get("predicate"), str), "predicate must be a string")
            for arg in frame.get("arguments", []):
                _expect(
                    isinstance(arg.get("role"), str) and isinstance(arg.get("text"), str),
                    "arguments must carry string role and text",
                )
        return f"{len(frames)} frame(s)"

    def srl_rejects_malformed() -> str:
        status, _ = transport.post("/v1/srl", {"text": 7})
        _expect(400 <= status < 500, f"malformed body must get a 4xx, got {status}")
        return f"HTTP {status}"

    def depparse_shape() -> str:
        status, body = transport.post("/v1/depparse", {"text": SAMPLE_TEXT, "lang": lang})
        _expect(status == 200, f"expected 200, got {status}")
        nodes = body.get("nodes")
        _expect(isinstance(nodes, list) and nodes, "nodes must be a non-empty list")
        DependencyTree.from_nodes(nodes)  # raises MalformedTree when not a tree
        return f"{len(nodes)} node(s), valid tree"

    def depparse_rejects_malformed() -> str:
        status, _ = transport.post("/v1/depparse", {"lang": lang})
        _expect(400 <= status < 500, f"malformed body must get a 4xx, got {status}")
        return f"HTTP {status}"

    def nli_normalized() -> str:
        status, body = transport.post(
            "/v1/nli", {"premise": SAMPLE_PREMISE, "hypothesis": SAMPLE_HYPOTHESIS}
        )
        _expect(status == 200, f"expected 200, got {status}")
        _expect(
            tuple(list(body)[:3]) == NLI_KEYS,
            f"first three keys must be {NLI_KEYS}, got {tuple(body)[:3]}",
        )
        values = [body[k] for k in NLI_KEYS]
        _expect(
            all(isinstance(v, (int, float)) and 0.0 <= v <= 1.0 for v in values),
            f"probabilities must be fractions in [0, 1], got {values}",
        )
        total = sum(values)
        _expect(
            math.isclose(total, 1.0, abs_tol=1e-6),
            f"triple must sum to 1 within 1e-6, got {total}",
        )
        return f"sum = {total:.9f}"

    def nli_rejects_malformed() -> str:
        status, _ = transport.post("/v1/nli", {"premise": "only half a pair"})
        _expect(400 <= status < 500, f"malformed body must get a 4xx, got {status}")
        return f"HTTP {status}"

    def unknown_path() -> str:
        status, _ = transport.post("/v1/definitely-not-a-capability", {})
        _expect(status == 404, f"unknown path must get 404, got {status}")
        return "HTTP 404"

    def deterministic_repeat() -> str:
        first = transport.post("/v1/nli", {"premise": SAMPLE_PREMISE, "hypothesis": SAMPLE_HYPOTHESIS})
        second = transport.post("/v1/nli", {"premise": SAMPLE_PREMISE, "hypothesis": SAMPLE_HYPOTHESIS})
        _expect(first == second, "identical NLI request must get identical response")
        first = transport.post("/v1/srl", {"text": SAMPLE_TEXT, "lang": lang})
        second = transport.post("/v1/srl", {"text": SAMPLE_TEXT, "lang": lang})
        _expect(first == second, "identical SRL request must get identical response")
        return "repeat responses identical"

    probes = [
        ("healthz", healthz),
        ("srl_shape", srl_shape),
        ("srl_rejects_malformed", srl_rejects_malformed),
        ("depparse_shape", depparse_shape),
        ("depparse_rejects_malformed", depparse_rejects_malformed),
        ("nli_normalized", nli_normalized),
        ("nli_rejects_malformed", nli_rejects_malformed),
        ("unknown_path", unknown_path),
        ("deterministic_repeat", deterministic_repeat),
    ]
    return [_check(name, probe) for name, probe in probes]


def assert_conformant(transport, lang: str = "EN") -> list[ConformanceCheck]:
    """Run the suite and raise AssertionError listing every failed check."""
    results = run_conformance(transport, lang=lang)
    failures = [r for r in results if not r.ok]
    if failures:
        lines = [f"  {r.name}: {r.detail}" for r in failures]
        raise AssertionError(
            f"{len(failures)} conformance check(s) failed:\n" + "\n".join(lines)
        )
    return results
