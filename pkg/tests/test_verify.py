"""Cross-checking flagged spans with verifier models."""

from __future__ import annotations

import json

import numpy as np
import pytest

from span_sleuth.backends import (
    BackendConfig,
    ChatClient,
    JUDGMENT_CONFIRMED,
    JUDGMENT_REFUTED,
    JUDGMENT_UNSURE,
)
from span_sleuth.corpus import AnswerRecord, CharSpan
from span_sleuth.detect import SpanPrediction
from span_sleuth.errors import IdMismatch
from span_sleuth.verify import (
    format_verification_table,
    verification_object,
    verify_predictions,
    write_verification_report,
)


def record_of(record_id: str, answer: str, question: str = "q?") -> AnswerRecord:
    return AnswerRecord(
        id=record_id, lang="EN", question=question, answer=answer,
        model_id="m", tokens=[], logits=[],
    )


def pred_of(record_id: str, answer_len: int, spans) -> SpanPrediction:
    return SpanPrediction(
        record_id, [CharSpan(s, e) for s, e in spans], np.zeros(answer_len)
    )


RECORDS = [
    record_of("r1", "Petra won a silver medal in Beijing."),
    record_of("r2", "The Nile flows north."),
]
PREDICTIONS = [
    pred_of("r1", 37, [(12, 24), (28, 35)]),  # "silver medal", "Beijing"
    pred_of("r2", 21, [(4, 8)]),              # "Nile"
]


def verifier(confirm: str | None = None, model_name: str = "mock-verifier", **extra):
    endpoint = "mock://chat?mode=verifier"
    if confirm:
        endpoint += f"&confirm={confirm}"
    return BackendConfig(endpoint, model_name=model_name, retry_backoff=0.0, **extra)


class TestVerifyPredictions:
    def test_confirm_all_gives_full_match_rate(self):
        (report,) = verify_predictions(PREDICTIONS, RECORDS, [verifier("all")])
        assert report.n_spans == 3
        assert report.n_confirmed == 3
        assert report.n_refuted == 0 and report.n_unsure == 0
        assert report.match_rate == 1.0
        assert report.n_degraded == 0
        assert {v.span_text for v in report.verdicts} == {"silver medal", "Beijing", "Nile"}
        assert all(v.judgment == JUDGMENT_CONFIRMED for v in report.verdicts)

    def test_confirm_none_gives_zero_match_rate(self):
        (report,) = verify_predictions(PREDICTIONS, RECORDS, [verifier("none")])
        assert report.n_confirmed == 0 and report.n_refuted == 3
        assert report.match_rate == 0.0

    def test_scripted_table_five_of_six(self, tmp_path):
        answer = "alpha bravo charlie delta echo foxtrot"
        words = answer.split()
        spans, start = [], 0
        for word in words:
            spans.append((start, start + len(word)))
            start += len(word) + 1
        table = {w: "HALLUCINATION: scripted." for w in words[:5]}
        table[words[5]] = "SUPPORTED: scripted."
        table_path = tmp_path / "table.json"
        table_path.write_text(json.dumps(table), encoding="utf-8")
        config = BackendConfig(
            f"mock://chat?mode=verifier&table={table_path}", model_name="scripted"
        )
        (report,) = verify_predictions(
            [pred_of("r", len(answer), spans)], [record_of("r", answer)], [config]
        )
        assert report.n_spans == 6
        assert report.n_confirmed == 5 and report.n_refuted == 1
        assert abs(report.match_rate - 5 / 6) <= 1e-9

    def test_no_spans_is_a_clean_zero(self):
        (report,) = verify_predictions(
            [pred_of("r1", 37, [])], [RECORDS[0]], [verifier("all")]
        )
        assert report.n_spans == 0
        assert report.match_rate == 0.0
        assert report.verdicts == []

    def test_multiple_verifiers_report_in_order(self):
        reports = verify_predictions(
            PREDICTIONS, RECORDS,
            [verifier("all", model_name="optimist"), verifier("none", model_name="skeptic")],
        )
        assert [r.verifier for r in reports] == ["optimist", "skeptic"]
        assert reports[0].match_rate == 1.0
        assert reports[1].match_rate == 0.0

    def test_dead_verifier_degrades_to_unsure(self):
        (report,) = verify_predictions(
            PREDICTIONS, RECORDS,
            [BackendConfig("mock://chat?dead=1", model_name="flaky",
                           max_retries=0, retry_backoff=0.0)],
        )
        assert report.n_spans == 3
        assert report.n_unsure == 3
        assert report.n_degraded == 3
        assert report.match_rate == 0.0
        assert all(v.judgment == JUDGMENT_UNSURE and v.degraded for v in report.verdicts)
        assert all("unavailable" in v.rationale for v in report.verdicts)

    def test_dead_verifier_does_not_poison_healthy_one(self):
        reports = verify_predictions(
            PREDICTIONS, RECORDS,
            [
                BackendConfig("mock://chat?dead=1", model_name="flaky",
                              max_retries=0, retry_backoff=0.0),
                verifier("all", model_name="healthy"),
            ],
        )
        assert reports[0].n_degraded == 3
        assert reports[1].n_degraded == 0 and reports[1].match_rate == 1.0

    def test_unknown_prediction_id_raises(self):
        with pytest.raises(IdMismatch):
            verify_predictions([pred_of("ghost", 5, [(0, 2)])], RECORDS, [verifier("all")])

    def test_prediction_order_does_not_change_counts(self):
        forward = verify_predictions(PREDICTIONS, RECORDS, [verifier("all")])[0]
        backward = verify_predictions(list(reversed(PREDICTIONS)), RECORDS,
                                      [verifier("all")])[0]
        assert (forward.n_spans, forward.n_confirmed) == (backward.n_spans, backward.n_confirmed)
        assert {(v.record_id, v.span_text) for v in forward.verdicts} == {
            (v.record_id, v.span_text) for v in backward.verdicts
        }

    def test_parallelism_must_be_positive(self):
        with pytest.raises(ValueError):
            verify_predictions(PREDICTIONS, RECORDS, [verifier("all")], parallelism=0)

    def test_parallel_and_serial_agree(self):
        serial = verify_predictions(PREDICTIONS, RECORDS, [verifier("all")], parallelism=1)
        parallel = verify_predictions(PREDICTIONS, RECORDS, [verifier("all")], parallelism=4)
        assert serial == parallel

    def test_accepts_prewired_clients(self):
        client = ChatClient(verifier("all", model_name="prewired"))
        (report,) = verify_predictions(PREDICTIONS, RECORDS, [client])
        assert report.verifier == "prewired"
        assert client.stats["requests"] == 3


class TestContextHandling:
    def test_retrieved_context_reaches_the_verifier_prompt(self, tmp_path):
        # The scripted judgment keys on a string that only the retrieved
        # context can contribute to the prompt.
        table_path = tmp_path / "table.json"
        table_path.write_text(json.dumps({"Reference passage": "HALLUCINATION: seen context."}))
        config = BackendConfig(f"mock://chat?mode=verifier&table={table_path}",
                               model_name="ctx-check")

        without_retrieval = verify_predictions(PREDICTIONS, RECORDS, [config])[0]
        assert without_retrieval.n_unsure == without_retrieval.n_spans

        retrieval = ChatClient(BackendConfig("mock://chat?mode=retrieval"))
        with_retrieval = verify_predictions(
            PREDICTIONS, RECORDS, [config], retrieval=retrieval
        )[0]
        assert with_retrieval.n_confirmed == with_retrieval.n_spans

    def test_dead_retrieval_falls_back_to_no_context(self):
        retrieval = ChatClient(
            BackendConfig("mock://chat?dead=1", max_retries=0, retry_backoff=0.0)
        )
        (report,) = verify_predictions(
            PREDICTIONS, RECORDS, [verifier("all")], retrieval=retrieval
        )
        assert report.n_confirmed == 3  # verification proceeded without context
        assert report.n_degraded == 0


class TestCacheSeparation:
    def test_verifier_identity_prevents_cross_contamination(self, tmp_path):
        # Two verifiers share one cache directory; each must only ever see
        # its own recorded replies.
        optimist = verifier("all", model_name="optimist", cache_dir=str(tmp_path))
        skeptic = verifier("none", model_name="skeptic", cache_dir=str(tmp_path))
        reports = verify_predictions(
            PREDICTIONS, RECORDS, [optimist, skeptic], parallelism=1
        )
        assert reports[0].n_confirmed == 3
        assert reports[1].n_refuted == 3

    def test_repeat_run_replays_from_shared_cache(self, tmp_path):
        config = verifier("all", model_name="optimist", cache_dir=str(tmp_path))
        first = verify_predictions(PREDICTIONS, RECORDS, [config])[0]
        replay_client = ChatClient(verifier("all", model_name="optimist",
                                            cache_dir=str(tmp_path)))
        second = verify_predictions(PREDICTIONS, RECORDS, [replay_client])[0]
        assert first.n_confirmed == second.n_confirmed == 3
        assert replay_client.stats["network_calls"] == 0
        assert replay_client.stats["cache_hits"] == 3


class TestReportRendering:
    def test_table_format(self):
        reports = verify_predictions(PREDICTIONS, RECORDS, [verifier("all")])
        table = format_verification_table(reports)
        lines = table.splitlines()
        assert lines[0].split() == [
            "verifier", "n_spans", "confirmed", "refuted", "unsure", "match_rate"
        ]
        assert lines[1].split() == ["mock-verifier", "3", "3", "0", "0", "1.0000"]

    def test_object_and_file_round_trip(self, tmp_path):
        reports = verify_predictions(PREDICTIONS, RECORDS, [verifier("all")])
        obj = verification_object(reports)
        assert obj["reports"][0]["match_rate"] == 1.0
        assert len(obj["reports"][0]["verdicts"]) == 3
        verdict = obj["reports"][0]["verdicts"][0]
        assert set(verdict) == {"record_id", "span", "span_text", "judgment", "rationale"}
        path = tmp_path / "verification.json"
        write_verification_report(reports, path)
        assert json.loads(path.read_text(encoding="utf-8")) == obj
