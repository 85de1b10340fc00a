"""Line-delimited answer-record corpus: parsing, validation, serialization.

One record per UTF-8 line, one JSON object per record. Field names follow
the shared-task schema: ``id``, ``lang``, ``question``, ``model_output_text``,
``model_id``, ``model_output_tokens``, ``model_output_logits`` and the two
optional gold annotation fields ``soft_labels`` (``[{start, prob, end}, ...]``)
and ``hard_labels`` (``[[start, end], ...]``). Unknown fields are preserved
opaquely and round-trip unchanged.

All character offsets count Unicode scalar values of the answer text, never
bytes; this is what makes Arabic spans unambiguous.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Union

from .errors import FileUnreadable, MalformedRecord, OffsetOutOfRange, SchemaViolation

LANGUAGES = ("EN", "AR")

_REQUIRED_FIELDS = (
    "id",
    "lang",
    "question",
    "model_output_text",
    "model_id",
    "model_output_tokens",
    "model_output_logits",
)
_GOLD_FIELDS = ("soft_labels", "hard_labels")


@dataclass(frozen=True, order=True)
class CharSpan:
    """Half-open character interval [start, end) into an answer."""

    start: int
    end: int

    def __post_init__(self):
        if self.start < 0 or self.start >= self.end:
            raise OffsetOutOfRange(f"invalid span [{self.start}, {self.end})")

    def __len__(self) -> int:
        return self.end - self.start

    def overlaps(self, other: "CharSpan") -> bool:
        return self.start < other.end and other.start < self.end


@dataclass(frozen=True)
class SoftSpan:
    """Gold span with an annotator hallucination probability."""

    start: int
    end: int
    prob: float

    def __post_init__(self):
        if self.start < 0 or self.start >= self.end:
            raise OffsetOutOfRange(f"invalid span [{self.start}, {self.end})")


@dataclass
class AnswerRecord:
    """One dataset row: a question, the generated answer, and its token logits.

    ``soft_labels``/``hard_labels`` are ``None`` when the gold annotation is
    absent (unlabeled test data), which is distinct from an empty list
    (annotated as containing no hallucinations).
    """

    id: str
    lang: str
    question: str
    answer: str
    model_id: str
    tokens: list[str]
    logits: list[float]
    soft_labels: Optional[list[SoftSpan]] = None
    hard_labels: Optional[list[CharSpan]] = None
    extra: dict = field(default_factory=dict)

    @property
    def has_gold(self) -> bool:
        return self.soft_labels is not None and self.hard_labels is not None


@dataclass(frozen=True)
class Violation:
    """One invariant breach found by :func:`validate_record`."""

    code: str
    message: str


@dataclass(frozen=True)
class ParseFailure:
    """A line that could not be parsed, kept alongside the good records."""

    line_no: int
    error: Exception

    def __str__(self) -> str:
        return f"line {self.line_no}: {type(self.error).__name__}: {self.error}"


def _as_int(value, what: str) -> int:
    # bool is an int subclass; a true/false offset is always a mistake
    if isinstance(value, bool):
        raise SchemaViolation(f"{what} must be an integer, got {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    raise SchemaViolation(f"{what} must be an integer, got {value!r}")


def _as_float(value, what: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaViolation(f"{what} must be a number, got {value!r}")
    return float(value)


def _as_str(value, what: str) -> str:
    if not isinstance(value, str):
        raise SchemaViolation(f"{what} must be a string, got {type(value).__name__}")
    return value


def _check_span_range(start: int, end: int, answer_len: int, what: str) -> None:
    if not (0 <= start < end <= answer_len):
        raise OffsetOutOfRange(
            f"{what} [{start}, {end}) out of range for answer of length {answer_len}"
        )


def _parse_soft_labels(raw, answer_len: int) -> list[SoftSpan]:
    if not isinstance(raw, list):
        raise SchemaViolation("soft_labels must be an array")
    spans = []
    for i, item in enumerate(raw):
        if not isinstance(item, dict):
            raise SchemaViolation(f"soft_labels[{i}] must be an object")
        try:
            start = _as_int(item["start"], f"soft_labels[{i}].start")
            end = _as_int(item["end"], f"soft_labels[{i}].end")
            prob = _as_float(item["prob"], f"soft_labels[{i}].prob")
        except KeyError as exc:
            raise SchemaViolation(f"soft_labels[{i}] missing key {exc}") from None
        _check_span_range(start, end, answer_len, f"soft_labels[{i}]")
        if not 0.0 <= prob <= 1.0:
            raise SchemaViolation(f"soft_labels[{i}].prob {prob} outside [0, 1]")
        spans.append(SoftSpan(start=start, end=end, prob=prob))
    return spans


def _parse_hard_labels(raw, answer_len: int) -> list[CharSpan]:
    if not isinstance(raw, list):
        raise SchemaViolation("hard_labels must be an array")
    spans = []
    for i, item in enumerate(raw):
        if not isinstance(item, (list, tuple)) or len(item) != 2:
            raise SchemaViolation(f"hard_labels[{i}] must be a [start, end] pair")
        start = _as_int(item[0], f"hard_labels[{i}].start")
        end = _as_int(item[1], f"hard_labels[{i}].end")
        _check_span_range(start, end, answer_len, f"hard_labels[{i}]")
        spans.append(CharSpan(start=start, end=end))
    return spans


def parse_record(raw_line: Union[str, bytes]) -> AnswerRecord:
    """Parse one serialized line into an :class:`AnswerRecord`.

    Raises MalformedRecord for byte/JSON-level garbage, SchemaViolation for a
    well-formed object missing the contract (absent field, token/logit length
    mismatch, unknown language), and OffsetOutOfRange for gold spans outside
    the answer. Never raises anything else, whatever the input bytes.
    """
    if isinstance(raw_line, bytes):
        try:
            raw_line = raw_line.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedRecord(f"line is not valid UTF-8: {exc}") from None
    if not isinstance(raw_line, str):
        raise MalformedRecord(f"expected str or bytes, got {type(raw_line).__name__}")
    try:
        obj = json.loads(raw_line)
    except (json.JSONDecodeError, RecursionError, ValueError) as exc:
        raise MalformedRecord(f"not valid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise MalformedRecord(f"record must be an object, got {type(obj).__name__}")

    missing = [k for k in _REQUIRED_FIELDS if k not in obj]
    if missing:
        raise SchemaViolation(f"missing required fields: {', '.join(missing)}")

    rec_id = _as_str(obj["id"], "id")
    lang = _as_str(obj["lang"], "lang").upper()
    if lang not in LANGUAGES:
        raise SchemaViolation(f"lang must be one of {LANGUAGES}, got {obj['lang']!r}")
    question = _as_str(obj["question"], "question")
    answer = _as_str(obj["model_output_text"], "model_output_text")
    model_id = _as_str(obj["model_id"], "model_id")

    raw_tokens = obj["model_output_tokens"]
    raw_logits = obj["model_output_logits"]
    if not isinstance(raw_tokens, list):
        raise SchemaViolation("model_output_tokens must be an array")
    if not isinstance(raw_logits, list):
        raise SchemaViolation("model_output_logits must be an array")
    tokens = [_as_str(t, f"model_output_tokens[{i}]") for i, t in enumerate(raw_tokens)]
    logits = [_as_float(v, f"model_output_logits[{i}]") for i, v in enumerate(raw_logits)]
    if len(tokens) != len(logits):
        raise SchemaViolation(
            f"{len(tokens)} tokens but {len(logits)} logits; counts must match"
        )

    soft = _parse_soft_labels(obj["soft_labels"], len(answer)) if "soft_labels" in obj else None
    hard = _parse_hard_labels(obj["hard_labels"], len(answer)) if "hard_labels" in obj else None

    extra = {k: v for k, v in obj.items() if k not in _REQUIRED_FIELDS + _GOLD_FIELDS}
    return AnswerRecord(
        id=rec_id,
        lang=lang,
        question=question,
        answer=answer,
        model_id=model_id,
        tokens=tokens,
        logits=logits,
        soft_labels=soft,
        hard_labels=hard,
        extra=extra,
    )


def serialize_record(record: AnswerRecord) -> str:
    """Render one record back to its single-line serialization.

    Inverse of :func:`parse_record` for valid records, including opaque
    extra fields.
    """
    obj: dict = {
        "id": record.id,
        "lang": record.lang,
        "question": record.question,
        "model_output_text": record.answer,
        "model_id": record.model_id,
        "model_output_tokens": record.tokens,
        "model_output_logits": record.logits,
    }
    if record.soft_labels is not None:
        obj["soft_labels"] = [
            {"start": s.start, "prob": s.prob, "end": s.end} for s in record.soft_labels
        ]
    if record.hard_labels is not None:
        obj["hard_labels"] = [[s.start, s.end] for s in record.hard_labels]
    for key in sorted(record.extra):
        obj[key] = record.extra[key]
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def load_corpus(path) -> tuple[list[AnswerRecord], list[ParseFailure]]:
    """Read a corpus file, tolerating bad lines.

    Returns records in file order plus one ParseFailure per rejected line;
    a single malformed line never aborts the run. Blank lines are skipped.
    """
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise FileUnreadable(f"cannot read {path}: {exc}") from None
    records: list[AnswerRecord] = []
    failures: list[ParseFailure] = []
    for line_no, line in enumerate(data.split(b"\n"), start=1):
        if not line.strip():
            continue
        try:
            records.append(parse_record(line))
        except (MalformedRecord, SchemaViolation, OffsetOutOfRange) as exc:
            failures.append(ParseFailure(line_no=line_no, error=exc))
    return records, failures


def validate_record(record: AnswerRecord) -> list[Violation]:
    """Check every type invariant on an already-built record.

    Unlike :func:`parse_record` this never raises: violations come back as
    data so batch tooling can report them. Empty list means the record is
    valid.
    """
    violations: list[Violation] = []
    if record.lang not in LANGUAGES:
        violations.append(Violation("invalid_lang", f"lang {record.lang!r} not in {LANGUAGES}"))
    if len(record.tokens) != len(record.logits):
        violations.append(
            Violation(
                "length_mismatch",
                f"{len(record.tokens)} tokens vs {len(record.logits)} logits",
            )
        )
    for i, value in enumerate(record.logits):
        if not math.isfinite(value):
            violations.append(Violation("nonfinite_logit", f"logits[{i}] = {value}"))
    answer_len = len(record.answer)
    for name, spans in (("soft_labels", record.soft_labels), ("hard_labels", record.hard_labels)):
        if spans is None:
            continue
        for i, span in enumerate(spans):
            # start < end is enforced by the span types at construction
            if not (0 <= span.start and span.end <= answer_len):
                violations.append(
                    Violation(
                        "offset_out_of_range",
                        f"{name}[{i}] [{span.start}, {span.end}) exceeds answer length {answer_len}",
                    )
                )
            if isinstance(span, SoftSpan) and not 0.0 <= span.prob <= 1.0:
                violations.append(
                    Violation("prob_out_of_range", f"{name}[{i}].prob = {span.prob}")
                )
    return violations


def write_corpus(records: Iterable[AnswerRecord], path) -> None:
    """Write records one per line, the same format load_corpus reads."""
    lines = [serialize_record(r) for r in records]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
