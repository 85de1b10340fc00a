"""Backend boundary: verdict normalization, caching, retries, transports."""

from __future__ import annotations

import json
import math
import threading
from concurrent.futures import ThreadPoolExecutor

import pytest

from span_sleuth.backends import (
    BackendConfig,
    ChatClient,
    ENV_CACHE_DIR,
    ENV_LLM_ENDPOINT,
    ENV_LLM_KEY,
    EntailmentVerdict,
    JUDGMENT_CONFIRMED,
    JUDGMENT_REFUTED,
    JUDGMENT_UNSURE,
    SidecarClient,
    parse_judgment,
)
from span_sleuth.backends.cache import (
    KeyedLocks,
    ResponseCache,
    cache_key,
    canonical_json,
    now_iso,
    sha256_text,
)
from span_sleuth.backends.clients import make_transport
from span_sleuth.backends.mocks import (
    MockChatTransport,
    MockSidecarTransport,
    make_mock_transport,
    mock_nli_triple,
)
from span_sleuth.backends.transport import CountingTransport, FixtureOnlyTransport, HttpTransport
from span_sleuth.conformance import assert_conformant, run_conformance
from span_sleuth.errors import (
    BackendProtocolError,
    BackendUnavailable,
    EmptyContext,
)


def sidecar(transport, **config) -> SidecarClient:
    config.setdefault("endpoint", "mock://sidecar")
    config.setdefault("retry_backoff", 0.0)
    return SidecarClient(BackendConfig(**config), transport=transport)


def chat(transport, **config) -> ChatClient:
    config.setdefault("endpoint", "mock://chat")
    config.setdefault("retry_backoff", 0.0)
    return ChatClient(BackendConfig(**config), transport=transport)


# -- EntailmentVerdict.from_raw -------------------------------------------------

class TestEntailmentVerdict:
    def test_fraction_triple_passes_through(self):
        v = EntailmentVerdict.from_raw(0.2, 0.5, 0.3)
        assert v.as_triple() == (0.2, 0.5, 0.3)
        assert v.label == "neutral"

    def test_percent_triple_is_rescaled(self):
        v = EntailmentVerdict.from_raw(50, 30, 20)
        assert v.as_triple() == pytest.approx((0.5, 0.3, 0.2))
        assert v.label == "entailment"

    def test_percents_summing_just_under_100(self):
        # 0.7 + 75.3 + 23.9 = 99.9: read as percent, then renormalized.
        v = EntailmentVerdict.from_raw(0.7, 75.3, 23.9)
        assert v.label == "neutral"
        assert math.isclose(sum(v.as_triple()), 1.0, abs_tol=1e-12)
        assert v.p_entail == pytest.approx(0.007 / 0.999)
        assert v.p_neutral == pytest.approx(0.753 / 0.999)

    def test_contradiction_dominant_percent_triple(self):
        v = EntailmentVerdict.from_raw(1.1, 8.7, 90.2)
        assert v.label == "contradiction"
        assert v.p_contra == pytest.approx(0.902)

    def test_sum_below_percent_band_is_renormalized_as_fractions(self):
        v = EntailmentVerdict.from_raw(98.9, 0.0, 0.0)
        assert v.as_triple() == (1.0, 0.0, 0.0)

    def test_general_renormalization(self):
        v = EntailmentVerdict.from_raw(0.2, 0.2, 0.1)
        assert v.as_triple() == pytest.approx((0.4, 0.4, 0.2))

    def test_near_one_sum_left_untouched(self):
        # Within the 1e-6 band the values must come back bit-identical.
        v = EntailmentVerdict.from_raw(0.25, 0.25, 0.5)
        assert v.as_triple() == (0.25, 0.25, 0.5)

    def test_tie_prefers_entailment_over_neutral(self):
        assert EntailmentVerdict.from_raw(0.4, 0.4, 0.2).label == "entailment"

    def test_tie_prefers_neutral_over_contradiction(self):
        assert EntailmentVerdict.from_raw(0.1, 0.45, 0.45).label == "neutral"

    def test_three_way_tie(self):
        assert EntailmentVerdict.from_raw(1, 1, 1).label == "entailment"

    @pytest.mark.parametrize(
        "triple",
        [(-0.1, 0.6, 0.5), (float("nan"), 0.5, 0.5), (0.0, 0.0, 0.0),
         (float("inf"), 0.0, 0.0), ("high", 0.1, 0.1), (None, 0.5, 0.5)],
    )
    def test_unnormalizable_triples_rejected(self, triple):
        with pytest.raises(BackendProtocolError):
            EntailmentVerdict.from_raw(*triple)


# -- parse_judgment ----------------------------------------------------------------

@pytest.mark.parametrize(
    "reply,expected",
    [
        ("HALLUCINATION: the span is unsupported.", JUDGMENT_CONFIRMED),
        ("hallucination, clearly.", JUDGMENT_CONFIRMED),
        ("**HALLUCINATION** definitely", JUDGMENT_CONFIRMED),
        ("SUPPORTED: consistent with the reference.", JUDGMENT_REFUTED),
        ("Supported.", JUDGMENT_REFUTED),
        ("UNSURE: cannot tell.", JUDGMENT_UNSURE),
        ("Well, it depends on the source.", JUDGMENT_UNSURE),
        ("", JUDGMENT_UNSURE),
        ("   ", JUDGMENT_UNSURE),
    ],
)
def test_parse_judgment(reply, expected):
    judgment, rationale = parse_judgment(reply)
    assert judgment == expected
    assert rationale == reply.strip()


# -- cache primitives -----------------------------------------------------------------

class TestCachePrimitives:
    def test_canonical_json_sorts_keys(self):
        assert canonical_json({"b": 1, "a": 2}) == '{"a":2,"b":1}'

    def test_canonical_json_keeps_unicode(self):
        assert canonical_json({"q": "مصر"}) == '{"q":"مصر"}'

    def test_cache_key_is_hex_digest(self):
        key = cache_key("v1/nli", {"hypothesis": "x"})
        assert len(key) == 64 and all(c in "0123456789abcdef" for c in key)

    def test_cache_key_separates_operations_and_inputs(self):
        base = cache_key("v1/srl", {"text": "x"})
        assert cache_key("v1/depparse", {"text": "x"}) != base
        assert cache_key("v1/srl", {"text": "y"}) != base
        assert cache_key("v1/srl", {"text": "x"}) == base

    def test_sha256_text(self):
        assert sha256_text("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"

    def test_memory_cache_round_trip(self):
        cache = ResponseCache()
        assert cache.get("k") is None
        cache.put("k", {"v": 1})
        assert cache.get("k") == {"v": 1}
        assert cache.misses == 1 and cache.hits == 1

    def test_disk_cache_persists_across_instances(self, tmp_path):
        ResponseCache(tmp_path).put("abc123", {"v": "x"})
        assert (tmp_path / "abc123.json").is_file()
        assert ResponseCache(tmp_path).get("abc123") == {"v": "x"}

    def test_disk_cache_files_are_canonical_json(self, tmp_path):
        ResponseCache(tmp_path).put("k1", {"b": 1, "a": "مصر"})
        assert (tmp_path / "k1.json").read_text(encoding="utf-8") == '{"a":"مصر","b":1}'

    def test_readonly_cache_never_writes(self, tmp_path):
        cache = ResponseCache(tmp_path, readonly=True)
        cache.put("k", {"v": 1})
        assert cache.get("k") is None
        assert list(tmp_path.iterdir()) == []

    def test_write_fixture_bypasses_readonly(self, tmp_path):
        cache = ResponseCache(tmp_path, readonly=True)
        cache.write_fixture("k", {"v": 1})
        assert cache.get("k") == {"v": 1}
        assert cache.readonly  # restored afterwards

    def test_keyed_locks_return_same_lock_per_key(self):
        locks = KeyedLocks()
        assert locks.lock("a") is locks.lock("a")
        assert locks.lock("a") is not locks.lock("b")


class TestNowIso:
    def test_pinned_epoch(self, monkeypatch):
        monkeypatch.setenv("SOURCE_DATE_EPOCH", "0")
        assert now_iso() == "1970-01-01T00:00:00Z"

    def test_pinned_arbitrary_time(self, monkeypatch):
        monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
        assert now_iso() == "2023-11-14T22:13:20Z"

    def test_unpinned_is_utc_iso_shaped(self):
        stamp = now_iso()
        assert len(stamp) == 20 and stamp.endswith("Z") and stamp[10] == "T"


# -- retry / dedup machinery ------------------------------------------------------------

class FlakyTransport:
    """Fails the first ``fail_times`` posts, then delegates to a mock sidecar."""

    def __init__(self, fail_times: int, status: int | None = None):
        self.fail_times = fail_times
        self.status = status
        self.posts = 0
        self.inner = MockSidecarTransport()

    def post(self, path, body):
        self.posts += 1
        if self.posts <= self.fail_times:
            if self.status is not None:
                return self.status, {"error": "scripted failure"}
            raise BackendUnavailable("scripted connection failure")
        return self.inner.post(path, body)

    def get(self, path):
        return self.inner.get(path)


class TestRetries:
    def test_transient_failures_are_retried(self):
        transport = FlakyTransport(fail_times=2)
        client = sidecar(transport, max_retries=2)
        verdict = client.entail("premise text", "premise")
        assert verdict.label == "entailment"
        assert transport.posts == 3
        assert client.stats["network_calls"] == 1

    def test_exhausted_retries_surface_unavailable(self):
        transport = FlakyTransport(fail_times=3)
        client = sidecar(transport, max_retries=2)
        with pytest.raises(BackendUnavailable, match="3 attempt"):
            client.entail("premise text", "hypothesis")
        assert transport.posts == 3

    def test_5xx_is_retried(self):
        transport = FlakyTransport(fail_times=1, status=503)
        client = sidecar(transport, max_retries=2)
        assert client.entail("premise text", "premise").label == "entailment"
        assert transport.posts == 2

    def test_persistent_5xx_exhausts_retries(self):
        transport = FlakyTransport(fail_times=99, status=500)
        client = sidecar(transport, max_retries=1)
        with pytest.raises(BackendUnavailable, match="HTTP 500"):
            client.entail("premise text", "hypothesis")
        assert transport.posts == 2

    def test_4xx_is_not_retried(self):
        transport = FlakyTransport(fail_times=99, status=422)
        client = sidecar(transport, max_retries=5)
        with pytest.raises(BackendProtocolError, match="422"):
            client.entail("premise text", "hypothesis")
        assert transport.posts == 1

    def test_zero_retries_means_one_attempt(self):
        transport = FlakyTransport(fail_times=1)
        client = sidecar(transport, max_retries=0)
        with pytest.raises(BackendUnavailable, match="1 attempt"):
            client.entail("premise text", "hypothesis")
        assert transport.posts == 1


class TestDeduplication:
    def test_identical_concurrent_requests_make_one_network_call(self):
        counting = CountingTransport(MockSidecarTransport())
        client = sidecar(counting)
        barrier = threading.Barrier(8)

        def call():
            barrier.wait()
            return client.entail("Petra won a medal.", "a medal")

        with ThreadPoolExecutor(max_workers=8) as pool:
            results = list(pool.map(lambda _: call(), range(8)))

        assert counting.posts == 1
        assert client.stats["requests"] == 8
        assert client.stats["network_calls"] == 1
        assert client.stats["cache_hits"] == 7
        assert len({r.as_triple() for r in results}) == 1

    def test_sequential_repeat_hits_cache(self):
        counting = CountingTransport(MockSidecarTransport())
        client = sidecar(counting)
        first = client.entail("Petra won a medal.", "a medal")
        second = client.entail("Petra won a medal.", "a medal")
        assert first == second
        assert counting.posts == 1

    def test_distinct_requests_are_not_deduplicated(self):
        counting = CountingTransport(MockSidecarTransport())
        client = sidecar(counting)
        client.entail("Petra won a medal.", "a medal")
        client.entail("Petra won a medal.", "a rocket")
        assert counting.posts == 2


# -- SidecarClient protocol handling ----------------------------------------------------

class ScriptedTransport:
    """Returns a fixed (status, body) for every post."""

    def __init__(self, status: int, body: dict):
        self.status = status
        self.body = body

    def post(self, path, body):
        return self.status, self.body

    def get(self, path):
        return self.status, self.body


class TestSidecarClient:
    def test_srl_parse_returns_frames(self):
        client = sidecar(MockSidecarTransport())
        frames = client.srl_parse("Petra van Stoveren won a silver medal.", "EN")
        assert frames and frames[0].predicate == "won"
        assert ("ARG0", "Petra van Stoveren") in frames[0].arguments

    def test_blank_text_short_circuits(self):
        counting = CountingTransport(MockSidecarTransport())
        client = sidecar(counting)
        assert client.srl_parse("   ", "EN") == []
        assert client.dep_parse("", "EN") == []
        assert counting.posts == 0

    def test_missing_frames_field_is_protocol_error(self):
        client = sidecar(ScriptedTransport(200, {"something": []}))
        with pytest.raises(BackendProtocolError, match="frames"):
            client.srl_parse("text", "EN")

    def test_malformed_frame_is_protocol_error(self):
        client = sidecar(ScriptedTransport(200, {"frames": [{"arguments": []}]}))
        with pytest.raises(BackendProtocolError, match="malformed SRL frame"):
            client.srl_parse("text", "EN")

    def test_missing_nodes_field_is_protocol_error(self):
        client = sidecar(ScriptedTransport(200, {}))
        with pytest.raises(BackendProtocolError, match="nodes"):
            client.dep_parse("text", "EN")

    def test_nli_missing_key_is_protocol_error(self):
        client = sidecar(ScriptedTransport(200, {"entailment": 0.5, "neutral": 0.5}))
        with pytest.raises(BackendProtocolError, match="contradiction"):
            client.entail("p", "h")

    def test_empty_hypothesis_rejected_locally(self):
        client = sidecar(MockSidecarTransport())
        with pytest.raises(ValueError):
            client.entail("premise", "  ")

    def test_healthz(self):
        client = sidecar(MockSidecarTransport())
        body = client.healthz()
        assert body["status"] == "ok" and body["models"]

    def test_healthz_unavailable_when_dead(self):
        client = sidecar(MockSidecarTransport(dead=True))
        with pytest.raises(BackendUnavailable):
            client.healthz()

    def test_nli_cache_key_recipe_is_stable(self):
        key = SidecarClient.nli_key("premise text", "hypothesis", "model-x")
        expected = cache_key(
            "v1/nli",
            {
                "premise_sha256": sha256_text("premise text"),
                "hypothesis": "hypothesis",
                "model": "model-x",
            },
        )
        assert key == expected


# -- ChatClient ---------------------------------------------------------------------------

class TestChatClient:
    def test_retrieve_context(self):
        client = chat(MockChatTransport(mode="retrieval"), model_name="mock-retrieval")
        doc = client.retrieve_context("Who won the race?", "EN")
        assert doc.text.startswith("Reference passage:")
        assert "Who won the race?" in doc.text
        assert "Answer in English" in doc.text
        assert doc.question_id == ChatClient.retrieval_key("Who won the race?", "EN", "mock-retrieval")
        assert "mock-retrieval@" in doc.source

    def test_retrieval_prompt_names_the_language(self):
        client = chat(MockChatTransport(mode="retrieval"))
        assert "Answer in Arabic" in client.retrieve_context("من فاز؟", "AR").text

    def test_retrieval_is_cached_per_question(self):
        counting = CountingTransport(MockChatTransport(mode="retrieval"))
        client = chat(counting)
        client.retrieve_context("q1", "EN")
        client.retrieve_context("q1", "EN")
        client.retrieve_context("q2", "EN")
        assert counting.posts == 2

    def test_blank_context_raises_empty_context(self):
        client = chat(ScriptedTransport(200, {"choices": [{"message": {"content": "   "}}]}))
        with pytest.raises(EmptyContext):
            client.retrieve_context("q", "EN")

    def test_missing_choices_is_protocol_error(self):
        client = chat(ScriptedTransport(200, {"usage": {}}))
        with pytest.raises(BackendProtocolError, match="choices"):
            client.retrieve_context("q", "EN")

    def test_verify_span_confirm_all(self):
        client = chat(MockChatTransport(mode="verifier", confirm="all"), model_name="v1")
        verdict = client.verify_span("q", "the 2008 Olympics", "context text")
        assert verdict.judgment == JUDGMENT_CONFIRMED
        assert verdict.verifier == "v1"
        assert verdict.span_text == "the 2008 Olympics"

    def test_verify_span_confirm_none(self):
        client = chat(MockChatTransport(mode="verifier", confirm="none"))
        assert client.verify_span("q", "span", "ctx").judgment == JUDGMENT_REFUTED

    def test_verify_span_table_lookup(self):
        table = {"silver medal": "HALLUCINATION: wrong colour.",
                 "Beijing": "SUPPORTED: host city checks out."}
        client = chat(MockChatTransport(mode="verifier", table=table))
        assert client.verify_span("q", "silver medal").judgment == JUDGMENT_CONFIRMED
        assert client.verify_span("q", "Beijing").judgment == JUDGMENT_REFUTED
        assert client.verify_span("q", "unlisted span").judgment == JUDGMENT_UNSURE

    def test_chatty_reply_maps_to_unsure(self):
        client = chat(ScriptedTransport(
            200, {"choices": [{"message": {"content": "Let me think about that..."}}]}
        ))
        verdict = client.verify_span("q", "span", "ctx")
        assert verdict.judgment == JUDGMENT_UNSURE
        assert verdict.rationale == "Let me think about that..."

    def test_empty_span_rejected_locally(self):
        client = chat(MockChatTransport(mode="verifier", confirm="all"))
        with pytest.raises(ValueError):
            client.verify_span("q", "")

    def test_verifier_id_prefers_model_name(self):
        assert chat(MockChatTransport(), model_name="gpt-check").verifier_id() == "gpt-check"
        assert chat(MockChatTransport()).verifier_id() == "mock://chat"

    def test_verifier_identity_is_part_of_cache_key(self):
        assert ChatClient.verify_key("q", "span", "verifier-a") != ChatClient.verify_key(
            "q", "span", "verifier-b"
        )


# -- transport construction ------------------------------------------------------------------

class TestMakeTransport:
    def test_mock_sidecar(self):
        transport = make_transport(BackendConfig("mock://sidecar"))
        assert isinstance(transport, MockSidecarTransport)

    def test_mock_chat_with_options(self):
        transport = make_transport(BackendConfig("mock://chat?mode=verifier&confirm=all"))
        assert isinstance(transport, MockChatTransport)
        assert transport.mode == "verifier" and transport.confirm == "all"

    def test_mock_dead(self):
        transport = make_transport(BackendConfig("mock://dead"))
        with pytest.raises(BackendUnavailable):
            transport.post("/v1/srl", {"text": "x", "lang": "EN"})

    def test_mock_poison_gate(self):
        transport = make_mock_transport("mock://sidecar?fail_contains=POISON")
        with pytest.raises(BackendUnavailable):
            transport.post("/v1/srl", {"text": "has POISON inside", "lang": "EN"})
        status, _ = transport.post("/v1/srl", {"text": "clean", "lang": "EN"})
        assert status == 200

    def test_mock_table_from_file(self, tmp_path):
        table_path = tmp_path / "table.json"
        table_path.write_text(json.dumps({"span": "SUPPORTED: fine."}), encoding="utf-8")
        transport = make_mock_transport(f"mock://chat?mode=verifier&table={table_path}")
        assert transport.table == {"span": "SUPPORTED: fine."}

    def test_unknown_mock_endpoint(self):
        with pytest.raises(ValueError):
            make_mock_transport("mock://nonsense")

    def test_fixture_mode_refuses_live_http(self):
        transport = make_transport(BackendConfig("https://api.example.invalid"), fixture_mode=True)
        assert isinstance(transport, FixtureOnlyTransport)
        with pytest.raises(BackendUnavailable, match="fixture mode"):
            transport.post("/v1/nli", {})

    def test_fixture_mode_still_allows_mocks(self):
        transport = make_transport(BackendConfig("mock://sidecar"), fixture_mode=True)
        assert isinstance(transport, MockSidecarTransport)

    def test_http_transport_carries_bearer_token_from_env(self, monkeypatch):
        monkeypatch.setenv(ENV_LLM_KEY, "sk-test-123")
        transport = make_transport(BackendConfig("https://api.example.invalid"))
        assert isinstance(transport, HttpTransport)
        assert transport.headers == {"Authorization": "Bearer sk-test-123"}

    def test_http_transport_has_no_auth_header_without_key(self):
        transport = make_transport(BackendConfig("https://api.example.invalid"))
        assert transport.headers == {}


class TestBackendConfig:
    def test_env_endpoint_override_applies_to_placeholder(self, monkeypatch):
        monkeypatch.setenv(ENV_LLM_ENDPOINT, "https://llm.example.invalid")
        assert BackendConfig("env").with_env_overrides().endpoint == "https://llm.example.invalid"
        assert BackendConfig("").with_env_overrides().endpoint == "https://llm.example.invalid"

    def test_explicit_endpoint_wins_over_env(self, monkeypatch):
        monkeypatch.setenv(ENV_LLM_ENDPOINT, "https://llm.example.invalid")
        assert BackendConfig("mock://sidecar").with_env_overrides().endpoint == "mock://sidecar"

    def test_env_cache_dir_fills_unset_value(self, monkeypatch, tmp_path):
        monkeypatch.setenv(ENV_CACHE_DIR, str(tmp_path))
        assert BackendConfig("mock://sidecar").with_env_overrides().cache_dir == str(tmp_path)
        explicit = BackendConfig("mock://sidecar", cache_dir="/elsewhere")
        assert explicit.with_env_overrides().cache_dir == "/elsewhere"

    @pytest.mark.parametrize("kwargs", [{"timeout": 0}, {"timeout": -1}, {"max_retries": -1}])
    def test_invalid_config_rejected(self, kwargs):
        with pytest.raises(ValueError):
            BackendConfig("mock://sidecar", **kwargs)


# -- fixture replay -----------------------------------------------------------------------

class TestFixtureReplay:
    def test_seeded_cache_answers_without_network(self, tmp_path):
        cache = ResponseCache(tmp_path)
        key = SidecarClient.nli_key("premise", "hypothesis", "remote-nli")
        cache.put(key, {"entailment": 0.9, "neutral": 0.08, "contradiction": 0.02})
        client = SidecarClient(
            BackendConfig("https://nli.example.invalid", model_name="remote-nli",
                          cache_dir=str(tmp_path)),
            fixture_mode=True,
        )
        verdict = client.entail("premise", "hypothesis")
        assert verdict.label == "entailment"
        assert client.stats["network_calls"] == 0

    def test_cache_miss_in_fixture_mode_is_unavailable(self, tmp_path):
        client = SidecarClient(
            BackendConfig("https://nli.example.invalid", cache_dir=str(tmp_path)),
            fixture_mode=True,
        )
        with pytest.raises(BackendUnavailable, match="fixture mode"):
            client.entail("premise", "never recorded")


# -- mock rule systems ---------------------------------------------------------------------

class TestMockRules:
    def test_nli_verbatim_substring_is_entailed(self):
        triple = mock_nli_triple("Petra won a silver medal in Beijing.", "a silver medal")
        assert triple == {"entailment": 1.0, "neutral": 0.0, "contradiction": 0.0}

    def test_nli_is_whitespace_and_case_insensitive(self):
        triple = mock_nli_triple("Petra won a  Silver   Medal.", "a silver medal")
        assert triple["entailment"] == 1.0

    def test_nli_shared_vocabulary_is_neutral(self):
        triple = mock_nli_triple(
            "Petra won a bronze medal in the 2024 Olympics.",
            "medal in the 2024 Games",
        )
        assert triple == {"entailment": 0.05, "neutral": 0.85, "contradiction": 0.1}

    def test_nli_novel_vocabulary_is_contradiction(self):
        triple = mock_nli_triple("Petra won a medal.", "quantum entanglement peaked")
        assert triple == {"entailment": 0.02, "neutral": 0.08, "contradiction": 0.9}

    def test_chat_rejects_malformed_body(self):
        client = chat(MockChatTransport(mode="retrieval"))
        with pytest.raises(BackendProtocolError, match="422"):
            client._post_with_retries("/v1/chat/completions", {"messages": []})


# -- conformance suite ------------------------------------------------------------------------

class TestConformance:
    def test_mock_sidecar_is_conformant(self):
        checks = run_conformance(MockSidecarTransport())
        failing = [c for c in checks if not c.ok]
        assert failing == []
        assert len(checks) == 9
        assert_conformant(MockSidecarTransport())  # must not raise

    def test_dead_backend_fails_every_check(self):
        checks = run_conformance(MockSidecarTransport(dead=True))
        assert all(not c.ok for c in checks)
        with pytest.raises(AssertionError, match="healthz"):
            assert_conformant(MockSidecarTransport(dead=True))

    def test_checks_never_raise(self):
        # Even a transport that refuses every call yields results, not errors.
        checks = run_conformance(FixtureOnlyTransport("https://x.invalid"))
        assert checks and all(isinstance(c.detail, str) for c in checks)
