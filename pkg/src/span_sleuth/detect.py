"""End-to-end detection pipeline: retrieval → decomposition → scoring → spans.

Per record the stages are sequential: retrieve one reference context for the
question, decompose the answer into atomic units, obtain one entailment
verdict per unit (hypothesis = unit text, premise = context), fuse with the
token-logit confidence, and aggregate flagged units into character spans.
Records are processed with bounded parallelism; a backend failure degrades
exactly the record that hit it (the run continues and that record gets an
empty prediction, flagged in the run report).

The prediction file format is line-delimited JSON objects
``{id, hard_labels: [[start, end], ...], soft_labels: [{start, prob, end}, ...]}``
with soft spans stored as maximal runs of equal probability; zero-probability
characters are implicit.
"""

from __future__ import annotations

import json
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .backends import BackendConfig, ChatClient, SidecarClient
from .corpus import AnswerRecord, CharSpan, SoftSpan
from .decompose import decompose_srl, srl_from_dependencies
from .errors import (
    FileUnreadable,
    MalformedRecord,
    OffsetOutOfRange,
    SchemaViolation,
    SpanSleuthError,
)
from .scoring import (
    ScoringConfig,
    UnitAssessment,
    assess,
    logit_confidence,
    mean_answer_confidence,
)
from .span_algebra import align_tokens, char_mask, merge_spans

DEFAULT_MERGE_GAP = 1


@dataclass
class PipelineConfig:
    """Everything a detection run needs, loadable from one config mapping."""

    scoring: ScoringConfig = field(default_factory=ScoringConfig)
    sidecar: BackendConfig = field(default_factory=lambda: BackendConfig(endpoint="mock://sidecar"))
    retrieval: BackendConfig = field(
        default_factory=lambda: BackendConfig(endpoint="mock://chat?mode=retrieval")
    )
    verifiers: list[BackendConfig] = field(default_factory=list)
    merge_gap: int = DEFAULT_MERGE_GAP
    parallelism: int = 4
    fixture_mode: bool = False
    include_verbs: bool = True
    use_dependency_fallback: bool = True

    def __post_init__(self):
        if self.merge_gap < 0:
            raise ValueError(f"merge_gap must be non-negative, got {self.merge_gap}")
        if self.parallelism < 1:
            raise ValueError(f"parallelism must be >= 1, got {self.parallelism}")

    @classmethod
    def from_mapping(cls, raw: Mapping) -> "PipelineConfig":
        """Build from a nested config mapping (the parsed config file).

        Unknown keys raise ValueError so typos fail loudly instead of being
        silently ignored.
        """

        def check_keys(section: Mapping, allowed: set[str], where: str) -> None:
            unknown = sorted(set(section) - allowed)
            if unknown:
                raise ValueError(f"unknown {where} config keys: {', '.join(unknown)}")

        check_keys(raw, {"scoring", "pipeline", "backends"}, "top-level")
        scoring_raw = dict(raw.get("scoring") or {})
        check_keys(scoring_raw, {"alpha", "threshold", "normalization"}, "scoring")
        scoring = ScoringConfig(**scoring_raw)

        pipeline_raw = dict(raw.get("pipeline") or {})
        check_keys(
            pipeline_raw,
            {"merge_gap", "parallelism", "fixture_mode", "include_verbs",
             "use_dependency_fallback"},
            "pipeline",
        )

        backends_raw = dict(raw.get("backends") or {})
        check_keys(backends_raw, {"sidecar", "retrieval", "verifiers"}, "backends")
        backend_fields = {
            "endpoint", "model_name", "timeout", "max_retries", "cache_dir",
            "temperature", "retry_backoff",
        }

        def backend(section, default_endpoint: str) -> BackendConfig:
            section = dict(section or {})
            check_keys(section, backend_fields, "backend")
            section.setdefault("endpoint", default_endpoint)
            return BackendConfig(**section)

        verifiers = [
            backend(v, "mock://chat?mode=verifier") for v in backends_raw.get("verifiers") or []
        ]
        return cls(
            scoring=scoring,
            sidecar=backend(backends_raw.get("sidecar"), "mock://sidecar"),
            retrieval=backend(backends_raw.get("retrieval"), "mock://chat?mode=retrieval"),
            verifiers=verifiers,
            **pipeline_raw,
        )

    def with_cache_dir(self, directory: str, fixture_mode: Optional[bool] = None) -> "PipelineConfig":
        """Copy with every backend pointed at one shared cache directory
        (cache keys are operation-prefixed digests, so sharing is safe)."""
        from dataclasses import replace

        return replace(
            self,
            sidecar=replace(self.sidecar, cache_dir=directory),
            retrieval=replace(self.retrieval, cache_dir=directory),
            verifiers=[replace(v, cache_dir=directory) for v in self.verifiers],
            fixture_mode=self.fixture_mode if fixture_mode is None else fixture_mode,
        )


@dataclass
class ClientSet:
    """The backend clients one run shares across records and threads."""

    sidecar: SidecarClient
    retrieval: ChatClient
    verifiers: list[ChatClient] = field(default_factory=list)

    def stats(self) -> dict[str, dict[str, float]]:
        """Per-backend request/network/cache tallies with hit rates."""
        named = [("sidecar", self.sidecar), ("retrieval", self.retrieval)]
        named += [(f"verifier:{v.verifier_id()}", v) for v in self.verifiers]
        out: dict[str, dict[str, float]] = {}
        for name, client in named:
            requests = int(client.stats.get("requests", 0))
            hits = int(client.stats.get("cache_hits", 0))
            out[name] = {
                "requests": requests,
                "network_calls": int(client.stats.get("network_calls", 0)),
                "cache_hits": hits,
                "hit_rate": hits / requests if requests else 0.0,
            }
        return out


def build_clients(cfg: PipelineConfig) -> ClientSet:
    return ClientSet(
        sidecar=SidecarClient(cfg.sidecar, fixture_mode=cfg.fixture_mode),
        retrieval=ChatClient(cfg.retrieval, fixture_mode=cfg.fixture_mode),
        verifiers=[ChatClient(v, fixture_mode=cfg.fixture_mode) for v in cfg.verifiers],
    )


@dataclass
class SpanPrediction:
    """Aggregated prediction for one record.

    ``soft_probs`` has one entry per answer character; ``diagnostics``
    counts dropped units, unaligned tokens, and degradation. Invariant:
    every character inside a hard span has soft probability at least
    1 − threshold.
    """

    record_id: str
    hard_spans: list[CharSpan]
    soft_probs: np.ndarray
    diagnostics: Counter = field(default_factory=Counter)


@dataclass
class RecordAssessmentDetail:
    """assess_record plus the bookkeeping the run report needs."""

    assessments: list[UnitAssessment]
    counters: Counter
    notes: list[str]
    used_fallback: bool


def assess_record_detailed(
    record: AnswerRecord, clients: ClientSet, cfg: PipelineConfig
) -> RecordAssessmentDetail:
    """Full per-record pass: frames → units → verdicts → fused scores.

    The role labeler runs first; when it yields no frames and the fallback
    is enabled, frames are derived from a dependency parse instead. Units
    whose tokens could not be aligned get the answer-wide mean confidence
    rather than an error.
    """
    notes: list[str] = []
    counters: Counter = Counter()
    if not record.answer.strip():
        notes.append("empty answer: nothing to assess")
        return RecordAssessmentDetail([], counters, notes, used_fallback=False)

    frames = clients.sidecar.srl_parse(record.answer, record.lang)
    used_fallback = False
    if not frames and cfg.use_dependency_fallback:
        nodes = clients.sidecar.dep_parse(record.answer, record.lang)
        if nodes:
            frames, dep_notes = srl_from_dependencies(nodes, record.lang)
            notes.extend(dep_notes)
            used_fallback = bool(frames)
    if not frames:
        counters["no_frames"] += 1
        notes.append("no frames from role labeler or dependency fallback")
        return RecordAssessmentDetail([], counters, notes, used_fallback)

    units, drop_notes = decompose_srl(
        record.answer, record.tokens, frames, include_verbs=cfg.include_verbs
    )
    notes.extend(drop_notes)
    counters["dropped_units"] += len(drop_notes)
    counters["unaligned_tokens"] += align_tokens(record.answer, record.tokens).n_unaligned
    if not units:
        notes.append("no unit could be anchored in the answer")
        return RecordAssessmentDetail([], counters, notes, used_fallback)

    context = clients.retrieval.retrieve_context(record.question, record.lang)
    assessments: list[UnitAssessment] = []
    for unit in units:
        verdict = clients.sidecar.entail(context.text, unit.text)
        if unit.token_indices:
            unit_logits = [record.logits[i] for i in unit.token_indices]
            confidence = logit_confidence(unit_logits, record.logits, cfg.scoring.normalization)
        else:
            confidence = mean_answer_confidence(record.logits)
            notes.append(
                f"unit {unit.text!r}: no aligned tokens; using answer-mean confidence"
            )
            counters["confidence_fallbacks"] += 1
        assessments.append(assess(unit, verdict, confidence, cfg.scoring))
    return RecordAssessmentDetail(assessments, counters, notes, used_fallback)


def assess_record(
    record: AnswerRecord, clients: ClientSet, cfg: PipelineConfig
) -> list[UnitAssessment]:
    """Unit assessments for one record (see assess_record_detailed)."""
    return assess_record_detailed(record, clients, cfg).assessments


def emit_prediction(
    record: AnswerRecord,
    assessments: Sequence[UnitAssessment],
    cfg: PipelineConfig,
    diagnostics: Optional[Counter] = None,
    degraded: bool = False,
) -> SpanPrediction:
    """Aggregate unit verdicts into one prediction.

    Hard spans are the merged spans of flagged units; each character's soft
    probability is the max of (1 − refined score) over the units covering
    it. Characters merged into a hard span only by gap-bridging are floored
    at 1 − threshold so the hard/soft consistency rule holds for every
    character inside a hard span.
    """
    n = len(record.answer)
    counters = Counter(diagnostics or {})
    if degraded:
        counters["degraded"] += 1
        return SpanPrediction(record.id, [], np.zeros(n), counters)
    probs = np.zeros(n)
    for a in assessments:
        span = a.unit.span
        np.maximum(
            probs[span.start:span.end],
            1.0 - a.refined_score,
            out=probs[span.start:span.end],
        )
    flagged = [a.unit.span for a in assessments if a.hallucinated]
    hard = merge_spans(flagged, gap=cfg.merge_gap)
    floor = 1.0 - cfg.scoring.threshold
    for span in hard:
        np.maximum(probs[span.start:span.end], floor, out=probs[span.start:span.end])
    return SpanPrediction(record.id, hard, probs, counters)


@dataclass
class RecordStatus:
    """One row of the run report."""

    record_id: str
    ok: bool
    error: str = ""
    n_units: int = 0
    n_flagged: int = 0
    used_fallback: bool = False
    notes: list[str] = field(default_factory=list)


@dataclass
class RunReport:
    """Run-level outcome: per-record statuses plus backend usage."""

    statuses: list[RecordStatus]
    backend_stats: dict[str, dict[str, float]]

    @property
    def degraded_ids(self) -> list[str]:
        return [s.record_id for s in self.statuses if not s.ok]

    @property
    def degraded(self) -> bool:
        return bool(self.degraded_ids)

    def summary_lines(self) -> list[str]:
        lines = []
        n = len(self.statuses)
        flagged = sum(s.n_flagged for s in self.statuses)
        lines.append(
            f"{n} record(s): {n - len(self.degraded_ids)} ok, "
            f"{len(self.degraded_ids)} degraded, {flagged} unit(s) flagged"
        )
        for s in self.statuses:
            if not s.ok:
                lines.append(f"  degraded {s.record_id}: {s.error}")
        for name, stats in self.backend_stats.items():
            lines.append(
                f"  backend {name}: {stats['requests']} request(s), "
                f"{stats['network_calls']} network call(s), "
                f"cache hit rate {stats['hit_rate']:.2f}"
            )
        return lines


def run_pipeline(
    records: Sequence[AnswerRecord],
    cfg: PipelineConfig,
    clients: Optional[ClientSet] = None,
) -> tuple[list[SpanPrediction], RunReport]:
    """Detect over a corpus with record-level parallelism.

    Always yields one prediction per record, in input order. A record whose
    backends failed gets an empty prediction and a not-ok status; nothing
    here raises for per-record trouble.
    """
    clients = clients if clients is not None else build_clients(cfg)

    def work(record: AnswerRecord) -> tuple[SpanPrediction, RecordStatus]:
        try:
            detail = assess_record_detailed(record, clients, cfg)
        except SpanSleuthError as exc:
            pred = emit_prediction(record, [], cfg, degraded=True)
            status = RecordStatus(
                record_id=record.id, ok=False, error=f"{type(exc).__name__}: {exc}"
            )
            return pred, status
        pred = emit_prediction(record, detail.assessments, cfg, diagnostics=detail.counters)
        status = RecordStatus(
            record_id=record.id,
            ok=True,
            n_units=len(detail.assessments),
            n_flagged=sum(1 for a in detail.assessments if a.hallucinated),
            used_fallback=detail.used_fallback,
            notes=detail.notes,
        )
        return pred, status

    if cfg.parallelism == 1 or len(records) <= 1:
        outcomes = [work(r) for r in records]
    else:
        with ThreadPoolExecutor(max_workers=cfg.parallelism) as pool:
            outcomes = list(pool.map(work, records))

    predictions = [p for p, _ in outcomes]
    report = RunReport(statuses=[s for _, s in outcomes], backend_stats=clients.stats())
    return predictions, report


# -- prediction file format ---------------------------------------------------

def runs_from_probs(probs: np.ndarray) -> list[SoftSpan]:
    """Compress a per-character vector into maximal equal-probability runs.

    Zero-probability stretches are implicit and produce no run.
    """
    runs: list[SoftSpan] = []
    start = None
    current = 0.0
    for i, p in enumerate(np.asarray(probs, dtype=float)):
        if start is not None and p != current:
            if current != 0.0:
                runs.append(SoftSpan(start=start, end=i, prob=current))
            start = None
        if start is None and p != 0.0:
            start, current = i, float(p)
        elif start is None:
            current = 0.0
    if start is not None and current != 0.0:
        runs.append(SoftSpan(start=start, end=len(probs), prob=current))
    return runs


def probs_from_runs(runs: Sequence[SoftSpan], text_len: int) -> np.ndarray:
    """Expand runs back into a per-character vector (inverse of
    runs_from_probs for non-overlapping runs; overlaps take the max)."""
    probs = np.zeros(text_len)
    for run in runs:
        if run.end > text_len:
            raise SchemaViolation(
                f"soft run [{run.start}, {run.end}) exceeds text length {text_len}"
            )
        np.maximum(probs[run.start:run.end], run.prob, out=probs[run.start:run.end])
    return probs


def prediction_to_line(pred: SpanPrediction) -> str:
    obj = {
        "id": pred.record_id,
        "hard_labels": [[s.start, s.end] for s in pred.hard_spans],
        "soft_labels": [
            {"start": r.start, "prob": r.prob, "end": r.end}
            for r in runs_from_probs(pred.soft_probs)
        ],
    }
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def write_predictions(predictions: Sequence[SpanPrediction], path) -> None:
    lines = [prediction_to_line(p) for p in predictions]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


@dataclass
class PredictionRow:
    """One parsed line of a prediction file (no per-character expansion:
    the answer length lives with the gold record, not here)."""

    record_id: str
    hard_spans: list[CharSpan]
    soft_runs: list[SoftSpan]


def parse_prediction_line(line: Union[str, bytes]) -> PredictionRow:
    if isinstance(line, bytes):
        try:
            line = line.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedRecord(f"prediction line is not valid UTF-8: {exc}") from None
    try:
        obj = json.loads(line)
    except (json.JSONDecodeError, ValueError) as exc:
        raise MalformedRecord(f"prediction line is not valid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise MalformedRecord("prediction line must be an object")
    try:
        record_id = obj["id"]
        raw_hard = obj["hard_labels"]
        raw_soft = obj["soft_labels"]
    except KeyError as exc:
        raise SchemaViolation(f"prediction missing field {exc}") from None
    if not isinstance(record_id, str):
        raise SchemaViolation("prediction id must be a string")
    if not isinstance(raw_hard, list) or not isinstance(raw_soft, list):
        raise SchemaViolation("hard_labels and soft_labels must be arrays")
    hard = []
    for i, pair in enumerate(raw_hard):
        if not isinstance(pair, list) or len(pair) != 2:
            raise SchemaViolation(f"hard_labels[{i}] must be a [start, end] pair")
        hard.append(CharSpan(int(pair[0]), int(pair[1])))
    soft = []
    for i, item in enumerate(raw_soft):
        if not isinstance(item, dict):
            raise SchemaViolation(f"soft_labels[{i}] must be an object")
        try:
            run = SoftSpan(start=int(item["start"]), end=int(item["end"]), prob=float(item["prob"]))
        except KeyError as exc:
            raise SchemaViolation(f"soft_labels[{i}] missing key {exc}") from None
        if not 0.0 <= run.prob <= 1.0:
            raise SchemaViolation(f"soft_labels[{i}].prob {run.prob} outside [0, 1]")
        soft.append(run)
    previous_end = 0
    for i, run in enumerate(sorted(soft, key=lambda r: r.start)):
        if run.start < previous_end:
            raise SchemaViolation(f"soft_labels runs overlap at index {i}")
        previous_end = run.end
    return PredictionRow(record_id=record_id, hard_spans=hard, soft_runs=soft)


def load_predictions(path) -> list[PredictionRow]:
    """Read a prediction file. Unlike corpus loading this is strict: the
    file is this package's own output, so any bad line is a real bug."""
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise FileUnreadable(f"cannot read {path}: {exc}") from None
    rows = []
    for line_no, line in enumerate(data.split(b"\n"), start=1):
        if not line.strip():
            continue
        try:
            rows.append(parse_prediction_line(line))
        except (MalformedRecord, SchemaViolation, OffsetOutOfRange) as exc:
            raise type(exc)(f"line {line_no}: {exc}") from None
    return rows


def prediction_mask(pred: SpanPrediction) -> np.ndarray:
    """Boolean per-character mask of the hard spans."""
    return char_mask(pred.hard_spans, len(pred.soft_probs))
