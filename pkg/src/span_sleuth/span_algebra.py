"""Token/character alignment, span set operations, and the two task metrics.

The metric substrate is the per-character boolean mask: gold annotations are
character spans, so IoU is computed over character sets and the correlation
over per-character probability vectors. Both metrics are deterministic pure
functions.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.stats import rankdata

from .corpus import CharSpan
from .errors import LengthMismatch, OffsetOutOfRange

# Leading pieces tokenizers prepend to mark a word boundary. Stripped before
# searching the answer text: the answer itself never contains them.
_SUBWORD_MARKERS = ("▁", "Ġ", "##")


@dataclass
class TokenAlignment:
    """Character span per token, ``None`` where a token could not be located.

    Aligned spans are non-overlapping and strictly increasing; coverage is
    the aligned fraction (1.0 for an empty token list).
    """

    spans: list[Optional[CharSpan]]
    coverage: float

    def indices_overlapping(self, span: CharSpan) -> list[int]:
        """Token indices whose aligned span overlaps ``span``."""
        return [
            i
            for i, tok_span in enumerate(self.spans)
            if tok_span is not None and tok_span.overlaps(span)
        ]

    @property
    def n_unaligned(self) -> int:
        return sum(1 for s in self.spans if s is None)


def normalize_token(token: str) -> str:
    """Strip leading subword/whitespace markers and NFC-normalize."""
    stripped = True
    while stripped:
        stripped = False
        for marker in _SUBWORD_MARKERS:
            if token.startswith(marker):
                token = token[len(marker):]
                stripped = True
        while token[:1].isspace():
            token = token[1:]
            stripped = True
    return unicodedata.normalize("NFC", token)


def align_tokens(answer: str, tokens: Sequence[str]) -> TokenAlignment:
    """Greedy left-to-right alignment of generator tokens onto the answer.

    Each token is searched for (after marker stripping) at or beyond the end
    of the previous match. Tokens that cannot be located are marked
    unalignable and do not advance the cursor; their logits are simply
    excluded downstream, so degradation shows up in ``coverage`` rather than
    as an error.
    """
    spans: list[Optional[CharSpan]] = []
    pos = 0
    for token in tokens:
        text = normalize_token(token)
        if not text:
            spans.append(None)
            continue
        idx = answer.find(text, pos)
        if idx < 0:
            spans.append(None)
            continue
        spans.append(CharSpan(idx, idx + len(text)))
        pos = idx + len(text)
    aligned = len(spans) - sum(1 for s in spans if s is None)
    coverage = aligned / len(spans) if spans else 1.0
    return TokenAlignment(spans=spans, coverage=coverage)


def merge_spans(spans: Sequence[CharSpan], gap: int = 0) -> list[CharSpan]:
    """Union spans, bridging pairs separated by at most ``gap`` characters.

    Output is sorted and pairwise separated by more than ``gap``; with
    gap=0 this is the plain interval union.
    """
    if gap < 0:
        raise ValueError(f"gap must be non-negative, got {gap}")
    if not spans:
        return []
    ordered = sorted(spans, key=lambda s: (s.start, s.end))
    merged = [ordered[0]]
    for span in ordered[1:]:
        last = merged[-1]
        if span.start - last.end <= gap:
            if span.end > last.end:
                merged[-1] = CharSpan(last.start, span.end)
        else:
            merged.append(span)
    return merged


def char_mask(spans: Sequence[CharSpan], text_len: int) -> np.ndarray:
    """Boolean vector of length ``text_len``, true where covered by a span."""
    if text_len < 0:
        raise ValueError(f"text_len must be non-negative, got {text_len}")
    flags = np.zeros(text_len, dtype=bool)
    for span in spans:
        if not (0 <= span.start and span.end <= text_len):
            raise OffsetOutOfRange(
                f"span [{span.start}, {span.end}) exceeds text length {text_len}"
            )
        flags[span.start:span.end] = True
    return flags


def iou(pred: Sequence[CharSpan], gold: Sequence[CharSpan], text_len: int) -> float:
    """Intersection-over-union of the two character sets.

    Both empty counts as perfect agreement (1.0); exactly one empty is 0.0.
    """
    pred_mask = char_mask(pred, text_len)
    gold_mask = char_mask(gold, text_len)
    p, g = pred_mask.any(), gold_mask.any()
    if not p and not g:
        return 1.0
    if p != g:
        return 0.0
    inter = np.count_nonzero(pred_mask & gold_mask)
    union = np.count_nonzero(pred_mask | gold_mask)
    return inter / union


@dataclass(frozen=True)
class SpearmanResult:
    """Rank correlation value plus a flag for the constant-vector case."""

    value: float
    degenerate: bool = False


def soft_correlation(pred_probs: Sequence[float], gold_probs: Sequence[float]) -> SpearmanResult:
    """Spearman rank correlation of two per-character probability vectors.

    Ties get midranks. If either vector is constant the correlation is
    undefined; we return 0.0 with ``degenerate=True`` so aggregates over many
    records stay defined.
    """
    pred = np.asarray(pred_probs, dtype=float)
    gold = np.asarray(gold_probs, dtype=float)
    if pred.shape != gold.shape or pred.ndim != 1:
        raise LengthMismatch(
            f"expected two equal-length vectors, got shapes {pred.shape} and {gold.shape}"
        )
    if pred.size < 2 or np.ptp(pred) == 0 or np.ptp(gold) == 0:
        return SpearmanResult(value=0.0, degenerate=True)
    pred_ranks = rankdata(pred, method="average")
    gold_ranks = rankdata(gold, method="average")
    value = float(np.corrcoef(pred_ranks, gold_ranks)[0, 1])
    return SpearmanResult(value=value, degenerate=False)
