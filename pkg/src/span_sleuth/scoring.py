"""Token-logit confidence, score fusion, and threshold classification.

The confidence score is the mean softmax probability of a unit's tokens.
Two normalization modes exist for the softmax denominator:

* ``"within-unit"`` (default): the denominator runs over the unit's own
  tokens. The probabilities then sum to one inside the unit, so the mean is
  identically 1/n whatever the logit values — the score carries only the
  unit length. This degenerate reading is the one that reproduces published
  worked values (1/3 for a 3-token unit, 1/9 for a 9-token unit), so it
  stays the default.
* ``"whole-answer"``: the denominator runs over every token of the answer.
  This is the non-degenerate reading: the score strictly increases in each
  unit logit as long as some probability mass lies outside the unit.

The refined score is the convex combination
``alpha * p_entail + (1 - alpha) * confidence``; units strictly below the
threshold are flagged hallucinated.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

from .backends import EntailmentVerdict
from .decompose import AtomicUnit
from .errors import EmptyUnit

WITHIN_UNIT = "within-unit"
WHOLE_ANSWER = "whole-answer"
NORMALIZATION_MODES = (WITHIN_UNIT, WHOLE_ANSWER)

# Default weight on the entailment component: the unique alpha reproducing
# both published worked listings (0.1375 from p_entail 0.007 with a 3-token
# unit, 0.051 from p_entail 0.011 with a 9-token unit).
DEFAULT_ALPHA = 0.6
DEFAULT_THRESHOLD = 0.5


@dataclass
class ScoringConfig:
    alpha: float = DEFAULT_ALPHA
    threshold: float = DEFAULT_THRESHOLD
    normalization: str = WITHIN_UNIT

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"threshold must be in [0, 1], got {self.threshold}")
        if self.normalization not in NORMALIZATION_MODES:
            raise ValueError(
                f"normalization must be one of {NORMALIZATION_MODES}, got {self.normalization!r}"
            )


@dataclass
class UnitAssessment:
    """Scored verdict for one atomic unit."""

    unit: AtomicUnit
    verdict: EntailmentVerdict
    logit_score: float
    refined_score: float
    hallucinated: bool


def logit_confidence(
    unit_logits: Sequence[float],
    all_logits: Sequence[float] | None = None,
    mode: str = WITHIN_UNIT,
) -> float:
    """Mean softmax probability of a unit's tokens (overflow-safe).

    ``all_logits`` supplies the softmax denominator in whole-answer mode and
    is ignored within-unit. Raises EmptyUnit when the unit has no aligned
    tokens; the caller owns the fallback policy for that case.
    """
    unit = np.asarray(unit_logits, dtype=float)
    if unit.size == 0:
        raise EmptyUnit("unit has no aligned tokens")
    if mode == WITHIN_UNIT:
        log_denom = logsumexp(unit)
    elif mode == WHOLE_ANSWER:
        if all_logits is None:
            raise ValueError("whole-answer mode needs the full answer logits")
        full = np.asarray(all_logits, dtype=float)
        if not np.isin(unit, full).all():
            raise ValueError("unit logits must be drawn from the answer logits")
        log_denom = logsumexp(full)
    else:
        raise ValueError(f"unknown normalization mode {mode!r}")
    probs = np.exp(unit - log_denom)
    return float(probs.mean())


def mean_answer_confidence(all_logits: Sequence[float]) -> float:
    """Answer-wide mean softmax probability, the fallback for units whose
    tokens could not be aligned. 0.5 (uninformative) when the answer has no
    tokens at all."""
    n = len(all_logits)
    if n == 0:
        return 0.5
    full = np.asarray(all_logits, dtype=float)
    return float(np.exp(full - logsumexp(full)).mean())


def refined_score(p_entail: float, confidence: float, alpha: float = DEFAULT_ALPHA) -> float:
    """Convex fusion of entailment probability and token confidence."""
    for name, value in (("p_entail", p_entail), ("confidence", confidence), ("alpha", alpha)):
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"{name} must be in [0, 1], got {value}")
    return alpha * p_entail + (1.0 - alpha) * confidence


def classify_unit(refined: float, threshold: float = DEFAULT_THRESHOLD) -> bool:
    """True iff the unit is flagged hallucinated: strictly below threshold."""
    return refined < threshold


def assess(
    unit: AtomicUnit,
    verdict: EntailmentVerdict,
    confidence: float,
    config: ScoringConfig,
) -> UnitAssessment:
    """Build a UnitAssessment whose score/flag invariants hold by construction."""
    score = refined_score(verdict.p_entail, confidence, config.alpha)
    return UnitAssessment(
        unit=unit,
        verdict=verdict,
        logit_score=confidence,
        refined_score=score,
        hallucinated=classify_unit(score, config.threshold),
    )
