"""Acceptance gate for the inference sidecar.

One test per criterion, each printing an explicit pass line:

1. The shared wire-protocol conformance suite passes against a live
   service (all nine probes).
2. Live ``/v1/nli`` responses are fraction triples summing to 1 within
   1e-6, across a spread of premise/hypothesis pairs.
3. The sample contradiction hypothesis (the 2008 Beijing clause against
   the 2024 Paris premise) is judged contradiction-dominant with
   p_contra > 0.5, end to end through the pipeline's own client.
"""

from __future__ import annotations

from span_sleuth.backends.clients import BackendConfig, SidecarClient
from span_sleuth.backends.transport import HttpTransport
from span_sleuth.conformance import (
    SAMPLE_HYPOTHESIS,
    SAMPLE_PREMISE,
    SAMPLE_TEXT,
    assert_conformant,
)

TOL_NLI_SUM = 1e-6


def _passed(number: int, what: str) -> None:
    print(f"[acceptance] PASS criterion {number}: {what}")


def test_criterion_1_conformance_suite_against_live_service(live_server):
    checks = assert_conformant(HttpTransport(live_server, timeout=10.0))
    assert len(checks) == 9 and all(c.ok for c in checks)
    _passed(1, f"all {len(checks)} conformance probes green against {live_server}")


def test_criterion_2_nli_triples_are_normalized(live_server):
    transport = HttpTransport(live_server, timeout=10.0)
    pairs = [
        (SAMPLE_PREMISE, SAMPLE_HYPOTHESIS),
        (SAMPLE_PREMISE, "Petra van Stoveren"),
        (SAMPLE_PREMISE, "a silver medal"),
        (SAMPLE_TEXT, "quantum computing hardware"),
        ("", ""),
    ]
    worst = 0.0
    for premise, hypothesis in pairs:
        status, body = transport.post(
            "/v1/nli", {"premise": premise, "hypothesis": hypothesis}
        )
        assert status == 200
        assert list(body)[:3] == ["entailment", "neutral", "contradiction"]
        values = [body[k] for k in ("entailment", "neutral", "contradiction")]
        assert all(0.0 <= v <= 1.0 for v in values)
        worst = max(worst, abs(sum(values) - 1.0))
    assert worst <= TOL_NLI_SUM
    _passed(2, f"{len(pairs)} NLI triples sum to 1 (worst deviation {worst:.2e})")


def test_criterion_3_sample_hypothesis_is_contradiction_dominant(live_server):
    client = SidecarClient(BackendConfig(endpoint=live_server, model_name="builtin"))
    verdict = client.entail(SAMPLE_PREMISE, SAMPLE_HYPOTHESIS)
    assert verdict.label == "contradiction"
    assert verdict.p_contra > 0.5
    assert verdict.p_contra == max(verdict.p_entail, verdict.p_neutral, verdict.p_contra)
    _passed(3, f"sample hypothesis judged contradiction with p_contra = {verdict.p_contra:.3f}")
