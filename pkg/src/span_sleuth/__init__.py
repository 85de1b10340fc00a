"""Span-level hallucination detection for LLM answers.

Given a question, a generated answer, and the generator's token logits, the
pipeline decomposes the answer into semantic-role units, checks each unit
against retrieved reference context with an entailment model, fuses the
entailment probability with the generator's own token confidence, and emits
the flagged character spans plus per-character hallucination probabilities.
Predictions can then be scored against gold span annotations (IoU and rank
correlation) and cross-checked by independent verifier LLMs.
"""

__version__ = "0.1.0"

from .backends import (
    BackendConfig,
    ChatClient,
    ContextDocument,
    EntailmentVerdict,
    SidecarClient,
    SrlFrame,
    VerificationVerdict,
)
from .corpus import (
    AnswerRecord,
    CharSpan,
    SoftSpan,
    Violation,
    load_corpus,
    parse_record,
    serialize_record,
    validate_record,
    write_corpus,
)
from .decompose import (
    AtomicUnit,
    DependencyTree,
    decompose_srl,
    locate_unit,
    normalize_role,
    srl_from_dependencies,
)
from .detect import (
    PipelineConfig,
    SpanPrediction,
    assess_record,
    build_clients,
    emit_prediction,
    load_predictions,
    run_pipeline,
    write_predictions,
)
from .evaluation import EvaluationReport, aggregate, evaluate, evaluate_by_language
from .scoring import (
    ScoringConfig,
    UnitAssessment,
    classify_unit,
    logit_confidence,
    refined_score,
)
from .span_algebra import align_tokens, char_mask, iou, merge_spans, soft_correlation
from .verify import VerificationReport, verify_predictions

__all__ = [
    "AnswerRecord",
    "AtomicUnit",
    "BackendConfig",
    "CharSpan",
    "ChatClient",
    "ContextDocument",
    "DependencyTree",
    "EntailmentVerdict",
    "EvaluationReport",
    "PipelineConfig",
    "ScoringConfig",
    "SidecarClient",
    "SoftSpan",
    "SpanPrediction",
    "SrlFrame",
    "UnitAssessment",
    "VerificationReport",
    "VerificationVerdict",
    "Violation",
    "__version__",
    "aggregate",
    "align_tokens",
    "assess_record",
    "build_clients",
    "char_mask",
    "classify_unit",
    "decompose_srl",
    "emit_prediction",
    "evaluate",
    "evaluate_by_language",
    "iou",
    "load_corpus",
    "load_predictions",
    "locate_unit",
    "logit_confidence",
    "merge_spans",
    "normalize_role",
    "parse_record",
    "refined_score",
    "run_pipeline",
    "serialize_record",
    "soft_correlation",
    "srl_from_dependencies",
    "validate_record",
    "verify_predictions",
    "write_corpus",
    "write_predictions",
]
