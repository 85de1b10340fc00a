"""Cross-check detected spans with independent verifier models.

Each verifier is asked, span by span, whether the flagged text is a
hallucination given the question and the retrieved reference context. A
span counts as matched when the verifier answers confirmed-hallucination;
the match rate is confirmed / total spans. Verifier failures degrade the
span's judgment to unsure — a flaky verifier never aborts a batch.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

from .backends import (
    BackendConfig,
    ChatClient,
    JUDGMENT_CONFIRMED,
    JUDGMENT_REFUTED,
    JUDGMENT_UNSURE,
)
from .corpus import AnswerRecord, CharSpan
from .detect import PredictionRow, SpanPrediction
from .errors import BackendError, IdMismatch


@dataclass(frozen=True)
class SpanJudgment:
    """One verifier's verdict on one flagged span.

    ``degraded`` marks an unsure verdict caused by a verifier failure
    rather than an actual unsure answer.
    """

    verifier: str
    record_id: str
    span: CharSpan
    span_text: str
    judgment: str
    rationale: str
    degraded: bool = False


@dataclass
class VerificationReport:
    """Match-rate summary for one verifier over all flagged spans."""

    verifier: str
    n_spans: int
    n_confirmed: int
    n_refuted: int
    n_unsure: int
    match_rate: float
    verdicts: list[SpanJudgment] = field(default_factory=list)

    @property
    def n_degraded(self) -> int:
        return sum(1 for v in self.verdicts if v.degraded)


def _as_client(verifier: Union[BackendConfig, ChatClient], fixture_mode: bool) -> ChatClient:
    if isinstance(verifier, ChatClient):
        return verifier
    return ChatClient(verifier, fixture_mode=fixture_mode)


def _report_from(verifier_id: str, verdicts: Sequence[SpanJudgment]) -> VerificationReport:
    n = len(verdicts)
    confirmed = sum(1 for v in verdicts if v.judgment == JUDGMENT_CONFIRMED)
    refuted = sum(1 for v in verdicts if v.judgment == JUDGMENT_REFUTED)
    unsure = n - confirmed - refuted
    return VerificationReport(
        verifier=verifier_id,
        n_spans=n,
        n_confirmed=confirmed,
        n_refuted=refuted,
        n_unsure=unsure,
        match_rate=confirmed / max(n, 1),
        verdicts=list(verdicts),
    )


def verify_predictions(
    predictions: Sequence[Union[SpanPrediction, PredictionRow]],
    records: Sequence[AnswerRecord],
    verifiers: Sequence[Union[BackendConfig, ChatClient]],
    retrieval: Optional[ChatClient] = None,
    parallelism: int = 4,
    fixture_mode: bool = False,
) -> list[VerificationReport]:
    """One report per verifier over every hard span of every prediction.

    The verifier prompt includes the retrieved context when a retrieval
    client is supplied (warm from the detection run, so this rarely costs a
    network call). Each verifier sees every span; caches cannot cross
    verifiers because the verifier identity is part of the cache key.
    """
    if parallelism < 1:
        raise ValueError(f"parallelism must be >= 1, got {parallelism}")
    by_id = {r.id: r for r in records}
    tasks: list[tuple[AnswerRecord, CharSpan, str]] = []
    for pred in predictions:
        record = by_id.get(pred.record_id)
        if record is None:
            raise IdMismatch(f"prediction {pred.record_id!r} has no input record")
        for span in pred.hard_spans:
            tasks.append((record, span, record.answer[span.start:span.end]))

    contexts: dict[str, Optional[str]] = {}
    if retrieval is not None:
        for record, _, _ in tasks:
            if record.id in contexts:
                continue
            try:
                contexts[record.id] = retrieval.retrieve_context(record.question, record.lang).text
            except BackendError:
                contexts[record.id] = None

    clients = [_as_client(v, fixture_mode) for v in verifiers]

    def judge(client: ChatClient, record: AnswerRecord, span: CharSpan, text: str) -> SpanJudgment:
        degraded = False
        try:
            verdict = client.verify_span(record.question, text, contexts.get(record.id))
            judgment, rationale = verdict.judgment, verdict.rationale
        except BackendError as exc:
            judgment, rationale = JUDGMENT_UNSURE, f"verifier unavailable: {exc}"
            degraded = True
        return SpanJudgment(
            verifier=client.verifier_id(),
            record_id=record.id,
            span=span,
            span_text=text,
            judgment=judgment,
            rationale=rationale,
            degraded=degraded,
        )

    jobs = [(client, record, span, text) for client in clients for record, span, text in tasks]
    if parallelism == 1 or len(jobs) <= 1:
        verdicts = [judge(*job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            verdicts = list(pool.map(lambda job: judge(*job), jobs))

    reports = []
    for i, client in enumerate(clients):
        chunk = verdicts[i * len(tasks):(i + 1) * len(tasks)]
        reports.append(_report_from(client.verifier_id(), chunk))
    return reports


def format_verification_table(reports: Sequence[VerificationReport]) -> str:
    header = (
        f"{'verifier':<28}{'n_spans':>8}{'confirmed':>10}{'refuted':>8}"
        f"{'unsure':>8}{'match_rate':>12}"
    )
    lines = [header]
    for r in reports:
        lines.append(
            f"{r.verifier:<28}{r.n_spans:>8}{r.n_confirmed:>10}{r.n_refuted:>8}"
            f"{r.n_unsure:>8}{r.match_rate:>12.4f}"
        )
    return "\n".join(lines)


def verification_object(reports: Sequence[VerificationReport]) -> dict:
    return {
        "reports": [
            {
                "verifier": r.verifier,
                "n_spans": r.n_spans,
                "n_confirmed": r.n_confirmed,
                "n_refuted": r.n_refuted,
                "n_unsure": r.n_unsure,
                "match_rate": r.match_rate,
                "verdicts": [
                    {
                        "record_id": v.record_id,
                        "span": [v.span.start, v.span.end],
                        "span_text": v.span_text,
                        "judgment": v.judgment,
                        "rationale": v.rationale,
                    }
                    for v in r.verdicts
                ],
            }
            for r in reports
        ]
    }


def write_verification_report(reports: Sequence[VerificationReport], path) -> None:
    Path(path).write_text(
        json.dumps(verification_object(reports), ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8",
    )
