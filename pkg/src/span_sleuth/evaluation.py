"""Score prediction files against gold labels.

Two numbers per record: IoU of the hard spans over characters, and the
Spearman correlation between the predicted per-character probabilities and
the gold soft labels expanded to per-character form (max probability where
gold spans overlap, zero outside). Report means are arithmetic means over
scored records; zero-length answers are excluded from means and counted
separately.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .corpus import AnswerRecord
from .detect import PredictionRow, SpanPrediction, probs_from_runs
from .errors import IdMismatch, MissingGold
from .span_algebra import iou, soft_correlation

PredictionLike = Union[SpanPrediction, PredictionRow]


@dataclass(frozen=True)
class RecordScore:
    """Metrics for one record."""

    record_id: str
    lang: str
    iou: float
    cor: float
    cor_degenerate: bool


@dataclass
class EvaluationReport:
    """Per-record scores and their means for one record group."""

    lang: str
    per_record: list[RecordScore]
    mean_iou: float
    mean_cor: float
    n: int
    n_skipped: int = 0

    @property
    def n_cor_degenerate(self) -> int:
        return sum(1 for s in self.per_record if s.cor_degenerate)


def _soft_vector(pred: PredictionLike, text_len: int) -> np.ndarray:
    if isinstance(pred, SpanPrediction):
        if len(pred.soft_probs) != text_len:
            raise IdMismatch(
                f"prediction {pred.record_id}: vector length {len(pred.soft_probs)}"
                f" does not match answer length {text_len}"
            )
        return np.asarray(pred.soft_probs, dtype=float)
    return probs_from_runs(pred.soft_runs, text_len)


def _hard_spans(pred: PredictionLike):
    return pred.hard_spans


def _record_id(pred: PredictionLike) -> str:
    return pred.record_id


def gold_soft_vector(record: AnswerRecord) -> np.ndarray:
    """Gold soft labels as one probability per character (max on overlap)."""
    if record.soft_labels is None:
        raise MissingGold(f"record {record.id} has no soft labels")
    return probs_from_runs(record.soft_labels, len(record.answer))


def score_record(pred: PredictionLike, gold: AnswerRecord) -> RecordScore:
    """Direct per-record metrics — exactly the span-algebra calls, no
    reweighting."""
    if gold.hard_labels is None or gold.soft_labels is None:
        raise MissingGold(f"record {gold.id} has no gold labels")
    text_len = len(gold.answer)
    value_iou = iou(_hard_spans(pred), gold.hard_labels, text_len)
    result = soft_correlation(_soft_vector(pred, text_len), gold_soft_vector(gold))
    return RecordScore(
        record_id=_record_id(pred),
        lang=gold.lang,
        iou=value_iou,
        cor=result.value,
        cor_degenerate=result.degenerate,
    )


def evaluate(
    predictions: Sequence[PredictionLike],
    gold: Sequence[AnswerRecord],
    lang: str | None = None,
) -> EvaluationReport:
    """Score predictions against gold records joined by id.

    Raises IdMismatch when a prediction has no gold record (or ids repeat)
    and MissingGold when a joined record lacks labels. Output is independent
    of prediction order: per-record rows are sorted by id.
    """
    by_id: dict[str, AnswerRecord] = {}
    for record in gold:
        if record.id in by_id:
            raise IdMismatch(f"duplicate gold id {record.id!r}")
        by_id[record.id] = record
    seen: set[str] = set()
    scores: list[RecordScore] = []
    n_skipped = 0
    langs: set[str] = set()
    for pred in predictions:
        pred_id = _record_id(pred)
        if pred_id in seen:
            raise IdMismatch(f"duplicate prediction id {pred_id!r}")
        seen.add(pred_id)
        record = by_id.get(pred_id)
        if record is None:
            raise IdMismatch(f"prediction {pred_id!r} has no gold record")
        if not record.answer:
            n_skipped += 1
            continue
        langs.add(record.lang)
        scores.append(score_record(pred, record))
    scores.sort(key=lambda s: s.record_id)
    if lang is None:
        lang = langs.pop() if len(langs) == 1 else "ALL"
    mean_iou = float(np.mean([s.iou for s in scores])) if scores else 0.0
    mean_cor = float(np.mean([s.cor for s in scores])) if scores else 0.0
    return EvaluationReport(
        lang=lang,
        per_record=scores,
        mean_iou=mean_iou,
        mean_cor=mean_cor,
        n=len(scores),
        n_skipped=n_skipped,
    )


def evaluate_by_language(
    predictions: Sequence[PredictionLike], gold: Sequence[AnswerRecord]
) -> list[EvaluationReport]:
    """One report per language present in the joined data, language-sorted."""
    by_id = {r.id: r for r in gold}
    groups: dict[str, list[PredictionLike]] = {}
    for pred in predictions:
        record = by_id.get(_record_id(pred))
        if record is None:
            raise IdMismatch(f"prediction {_record_id(pred)!r} has no gold record")
        groups.setdefault(record.lang, []).append(pred)
    return [evaluate(groups[lang], gold, lang=lang) for lang in sorted(groups)]


@dataclass(frozen=True)
class SummaryRow:
    """One language row of the aggregate table."""

    lang: str
    n: int
    mean_iou: float
    mean_cor: float


def aggregate(reports: Sequence[EvaluationReport]) -> list[SummaryRow]:
    """Fold reports into one row per language (n-weighted means)."""
    by_lang: dict[str, list[EvaluationReport]] = {}
    for report in reports:
        by_lang.setdefault(report.lang, []).append(report)
    rows = []
    for lang in sorted(by_lang):
        group = by_lang[lang]
        total = sum(r.n for r in group)
        if total:
            mean_iou = sum(r.mean_iou * r.n for r in group) / total
            mean_cor = sum(r.mean_cor * r.n for r in group) / total
        else:
            mean_iou = mean_cor = 0.0
        rows.append(SummaryRow(lang=lang, n=total, mean_iou=mean_iou, mean_cor=mean_cor))
    return rows


def format_summary_table(rows: Sequence[SummaryRow]) -> str:
    """Fixed-width human-readable table."""
    header = f"{'lang':<6}{'n':>6}{'mean_iou':>12}{'mean_cor':>12}"
    lines = [header]
    for row in rows:
        lines.append(f"{row.lang:<6}{row.n:>6}{row.mean_iou:>12.4f}{row.mean_cor:>12.4f}")
    return "\n".join(lines)


def report_object(reports: Sequence[EvaluationReport]) -> dict:
    """Machine-readable report: per-record rows plus the summary rows."""
    per_record = []
    for report in reports:
        for score in report.per_record:
            per_record.append(
                {
                    "id": score.record_id,
                    "lang": score.lang,
                    "iou": score.iou,
                    "cor": score.cor,
                    "cor_degenerate": score.cor_degenerate,
                }
            )
    summary = [
        {"lang": row.lang, "n": row.n, "mean_iou": row.mean_iou, "mean_cor": row.mean_cor}
        for row in aggregate(reports)
    ]
    return {"per_record": per_record, "summary": summary}


def write_report(reports: Sequence[EvaluationReport], path) -> None:
    Path(path).write_text(
        json.dumps(report_object(reports), ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8",
    )
