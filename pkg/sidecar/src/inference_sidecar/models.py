"""Deterministic inference models behind the sidecar endpoints.

Two engines exist.  The ``builtin`` engine (default) is pure rules: no
weights, no downloads, byte-identical output for identical input.  It is
deliberately simple linguistics -- clause-initial verb lexicons, a
preposition split, a capitalization/calendar heuristic for adjunct roles,
and a lexical-overlap softmax for entailment -- but it honors the wire
protocol exactly, which is what the detection pipeline and the fixture
recorder depend on.  The ``transformers`` engine swaps in a learned NLI
checkpoint when one is available on local disk; it never downloads and
fails fast with :class:`ModelLoadError` when the checkpoint is missing.
"""

from __future__ import annotations

import math
import re
from collections.abc import Iterable


class ModelLoadError(RuntimeError):
    """A configured model cannot be constructed (missing checkpoint,
    missing optional dependency, unknown engine option)."""


# -- shared lexical helpers ---------------------------------------------------

_PUNCT = ",.;:!?؟،؛\"'«»()[]{}"

_EN_VERBS = frozenset(
    """
    is are was were be been being has have had won wins win lost loses wrote
    writes written said says met meets became becomes founded found discovered
    discovers invented invents directed directs painted paints composed
    composes borders bordered orbits orbited flows flowed erupted erupts lies
    lay plays played runs ran gave gives given took takes taken made makes
    born died lives lived stars starred holds held begins began ended ends
    """.split()
)

_AR_VERBS = frozenset(
    """
    فاز فازت يفوز تفوز ولد ولدت كتب كتبت يكتب تقع يقع وقع توجد يوجد اخترع
    اخترعت اكتشف اكتشفت درس درست أصبح أصبحت كان كانت تدور يدور حصل حصلت
    """.split()
)

_EN_PREPOSITIONS = frozenset(
    "in at on during since from of to near by into onto within throughout".split()
)

_AR_PREPOSITIONS = frozenset("في من على إلى عن خلال قرب لدى حتى منذ".split())

_CALENDAR_WORDS = frozenset(
    """
    january february march april may june july august september october
    november december monday tuesday wednesday thursday friday saturday sunday
    يناير فبراير مارس أبريل مايو يونيو يوليو أغسطس سبتمبر أكتوبر نوفمبر ديسمبر
    """.split()
)

_TEMPORAL_WORDS = frozenset(
    """
    year years century centuries decade decades yesterday today tomorrow
    morning evening era age عام سنة سنوات قرن عقد أمس اليوم غدا
    """.split()
)

_YEAR_RE = re.compile(r"(?<!\d)\d{3,4}(?!\d)")
_PROPER_RE = re.compile(r"^[A-Z][a-zA-Z'’-]*$")
_WORD_RE = re.compile(r"\w+", re.UNICODE)
_NUMBER_RE = re.compile(r"\d+(?:[.,]\d+)?")
_PROPER_TOKEN_RE = re.compile(r"\b[A-Z][a-zA-Z'’-]+\b")
_CLAUSE_SPLIT_RE = re.compile(r"[.!?؟;؛\n]+")


def _strip(word: str) -> str:
    return word.strip(_PUNCT)


def _split_clauses(text: str) -> list[str]:
    return [part.strip() for part in _CLAUSE_SPLIT_RE.split(text) if part.strip()]


def _is_verb(word: str) -> bool:
    w = _strip(word)
    if not w:
        return False
    if w in _AR_VERBS:
        return True
    lower = w.lower()
    if lower in _EN_VERBS:
        return True
    # Latin-script regular past tense: "climbed", "orbited".
    return lower.isascii() and lower.isalpha() and len(lower) > 4 and lower.endswith("ed")


def _is_preposition(word: str) -> bool:
    w = _strip(word)
    return w.lower() in _EN_PREPOSITIONS or w in _AR_PREPOSITIONS


def _adjunct_role(words: Iterable[str]) -> str:
    """ARGM role for a trailing adjunct chunk.

    Calendar words (months, weekdays) are temporal no matter their casing;
    remaining capitalized tokens suggest a named place; a bare year or a
    temporal noun suggests time; everything else defaults to location.
    """
    stripped = [_strip(w) for w in words]
    lowered = {w.lower() for w in stripped if w}
    if lowered & _CALENDAR_WORDS:
        return "ARGM-TMP"
    if any(_PROPER_RE.match(w) for w in stripped if w and w.lower() not in _EN_PREPOSITIONS):
        return "ARGM-LOC"
    joined = " ".join(stripped)
    if _YEAR_RE.search(joined) or lowered & _TEMPORAL_WORDS:
        return "ARGM-TMP"
    return "ARGM-LOC"


# -- semantic role labeling ---------------------------------------------------

class RuleSrlModel:
    """Clause-level predicate/argument frames from word order.

    Per clause: the first verb is the predicate; words before it are ARG0;
    words after it up to the first preposition are ARG1; the remaining tail
    (preposition onward) is one adjunct argument whose role comes from
    :func:`_adjunct_role`.  Verb-initial clauses (Arabic VSO order) label
    the first post-verbal chunk ARG0 instead.
    """

    def __call__(self, text: str, lang: str = "EN") -> list[dict]:
        frames = []
        for clause in _split_clauses(text):
            words = clause.split()
            verb_index = next((i for i, w in enumerate(words) if _is_verb(w)), None)
            if verb_index is None:
                continue
            arguments = []
            if verb_index > 0:
                arguments.append({"role": "ARG0", "text": " ".join(words[:verb_index])})
            rest = words[verb_index + 1 :]
            prep_index = next((i for i, w in enumerate(rest) if _is_preposition(w)), len(rest))
            core = rest[:prep_index]
            if core:
                core_role = "ARG0" if verb_index == 0 else "ARG1"
                arguments.append({"role": core_role, "text": " ".join(core)})
            tail = rest[prep_index:]
            if tail:
                arguments.append({"role": _adjunct_role(tail), "text": " ".join(tail)})
            frames.append({"predicate": _strip(words[verb_index]), "arguments": arguments})
        return frames


# -- dependency parsing -------------------------------------------------------

class RuleDepparseModel:
    """Single-rooted dependency parse of the first clause.

    The first verb becomes the root.  Pre-verbal words form the subject
    chunk (head word ``nsubj``, the rest ``flat`` under it); post-verbal
    words up to the first preposition form the object chunk (``obj`` plus
    ``flat``); each preposition opens an oblique chunk (``case`` under an
    ``obl`` head).  Verb-initial clauses treat the first post-verbal chunk
    as the subject.  Verbless clauses get a nominal root with every other
    word attached ``dep``.
    """

    def __call__(self, text: str, lang: str = "EN") -> list[dict]:
        clauses = _split_clauses(text)
        if not clauses:
            return []
        words = clauses[0].split()
        if not words:
            return []

        heads = [0] * len(words)
        rels = ["dep"] * len(words)
        pos = ["X"] * len(words)
        for i, word in enumerate(words):
            stripped = _strip(word)
            if _NUMBER_RE.fullmatch(stripped or ""):
                pos[i] = "NUM"
            elif _is_preposition(word):
                pos[i] = "ADP"
            else:
                pos[i] = "NOUN"

        verb_index = next((i for i, w in enumerate(words) if _is_verb(w)), None)
        if verb_index is None:
            root = 0
            for i in range(1, len(words)):
                heads[i] = root + 1
                rels[i] = "dep"
        else:
            root = verb_index
            pos[root] = "VERB"
            if root > 0:
                self._attach_chunk(heads, rels, list(range(root)), root, "nsubj")
                rest_start = root + 1
                subject_pending = False
            else:
                rest_start = 1
                subject_pending = True
            i = rest_start
            while i < len(words):
                end = i
                while end < len(words) and not _is_preposition(words[end]):
                    end += 1
                if end > i:
                    rel = "nsubj" if subject_pending else "obj"
                    subject_pending = False
                    self._attach_chunk(heads, rels, list(range(i, end)), root, rel)
                    i = end
                if i < len(words):  # words[i] is a preposition opening an oblique
                    chunk_end = i + 1
                    while chunk_end < len(words) and not _is_preposition(words[chunk_end]):
                        chunk_end += 1
                    members = list(range(i + 1, chunk_end))
                    if members:
                        rel = "obl:tmod" if _adjunct_role(words[i:chunk_end]) == "ARGM-TMP" else "obl"
                        self._attach_chunk(heads, rels, members, root, rel)
                        heads[i] = members[0] + 1
                        rels[i] = "case"
                    else:
                        heads[i] = root + 1
                        rels[i] = "case"
                    i = chunk_end
        heads[root] = 0
        rels[root] = "root"

        return [
            {"index": i + 1, "form": words[i], "pos": pos[i], "head": heads[i], "rel": rels[i]}
            for i in range(len(words))
        ]

    @staticmethod
    def _attach_chunk(heads: list[int], rels: list[str], members: list[int],
                      root: int, rel: str) -> None:
        """Attach ``members[-1]`` to the root with ``rel``; earlier members
        hang off that head word as ``flat`` (head-final noun phrases)."""
        head_word = members[-1]
        heads[head_word] = root + 1
        rels[head_word] = rel
        for member in members[:-1]:
            heads[member] = head_word + 1
            rels[member] = "flat"


# -- natural language inference -----------------------------------------------

def _softmax3(a: float, b: float, c: float) -> tuple[float, float, float]:
    peak = max(a, b, c)
    exps = [math.exp(a - peak), math.exp(b - peak), math.exp(c - peak)]
    total = sum(exps)
    return exps[0] / total, exps[1] / total, exps[2] / total


# Closed alternative sets: naming different members of the same set is a
# conflict even without a number or proper-name mismatch.
_CONTRAST_SETS = (
    frozenset({"gold", "silver", "bronze"}),
    frozenset({"summer", "winter"}),
    frozenset({"north", "south", "east", "west"}),
    frozenset({"first", "second", "third", "fourth", "fifth"}),
)


def _fact_conflict(premise: str, hypothesis: str) -> bool:
    """True when each side asserts a number or proper name the other lacks,
    or the two sides pick different members of a closed alternative set --
    the cheap signatures of statements about different facts."""
    p_nums = set(_NUMBER_RE.findall(premise))
    h_nums = set(_NUMBER_RE.findall(hypothesis))
    if h_nums - p_nums and p_nums - h_nums:
        return True
    p_names = set(_PROPER_TOKEN_RE.findall(premise))
    h_names = set(_PROPER_TOKEN_RE.findall(hypothesis))
    if h_names - p_names and p_names - h_names:
        return True
    p_words = set(_WORD_RE.findall(premise.lower()))
    h_words = set(_WORD_RE.findall(hypothesis.lower()))
    for alternatives in _CONTRAST_SETS:
        p_hit = p_words & alternatives
        h_hit = h_words & alternatives
        if p_hit and h_hit and not (p_hit & h_hit):
            return True
    return False


class RuleNliModel:
    """Entailment probabilities from containment, overlap, and conflicts.

    Scores three logits -- verbatim containment is strong entailment;
    disjoint numbers or proper names on the two sides is strong
    contradiction; otherwise content-word overlap splits entailment from
    neutral -- then normalizes with a softmax so the returned fractions
    always sum to one.
    """

    def __call__(self, premise: str, hypothesis: str) -> dict[str, float]:
        p_flat = " ".join(premise.split()).lower()
        h_flat = " ".join(hypothesis.split()).lower()
        h_content = [
            w for w in _WORD_RE.findall(h_flat) if len(w) > 3 or w.isdigit()
        ]
        if h_flat and h_flat in p_flat:
            logits = (4.6, 0.6, -1.2)
        elif not h_content:
            logits = (0.2, 2.4, 0.2)
        else:
            p_words = set(_WORD_RE.findall(p_flat))
            overlap = sum(1 for w in h_content if w in p_words) / len(h_content)
            if _fact_conflict(premise, hypothesis):
                logits = (2.0 * overlap - 0.6, 0.7, 3.1)
            elif overlap >= 0.5:
                logits = (2.0 * overlap + 1.4, 1.6, -0.4)
            else:
                logits = (0.1, 1.9, 0.6)
        entailment, neutral, contradiction = _softmax3(*logits)
        return {
            "entailment": entailment,
            "neutral": neutral,
            "contradiction": contradiction,
        }


# -- optional learned engine ---------------------------------------------------

_NLI_LABEL_ALIASES = {
    "entailment": "entailment",
    "entail": "entailment",
    "neutral": "neutral",
    "contradiction": "contradiction",
    "contradict": "contradiction",
}


def load_transformers_nli(checkpoint: str, device: str = "cpu"):
    """Build an NLI callable from a local transformers checkpoint.

    Loads with ``local_files_only=True`` so a missing checkpoint fails in
    milliseconds instead of hanging on a network fetch.  Inference runs
    under ``torch.no_grad()`` with the model in eval mode, so repeated
    calls are deterministic.
    """
    try:
        import torch
        from transformers import AutoModelForSequenceClassification, AutoTokenizer
    except ImportError as exc:
        raise ModelLoadError(f"transformers engine unavailable: {exc}") from exc
    try:
        tokenizer = AutoTokenizer.from_pretrained(checkpoint, local_files_only=True)
        model = AutoModelForSequenceClassification.from_pretrained(
            checkpoint, local_files_only=True
        )
    except Exception as exc:
        raise ModelLoadError(f"cannot load NLI checkpoint {checkpoint!r}: {exc}") from exc
    model.eval()
    model.to(device)

    id2label = {
        int(i): _NLI_LABEL_ALIASES.get(str(label).lower(), str(label).lower())
        for i, label in getattr(model.config, "id2label", {}).items()
    }

    def infer(premise: str, hypothesis: str) -> dict[str, float]:
        inputs = tokenizer(premise, hypothesis, return_tensors="pt", truncation=True)
        inputs = {k: v.to(device) for k, v in inputs.items()}
        with torch.no_grad():
            logits = model(**inputs).logits[0]
        probs = torch.softmax(logits, dim=-1).tolist()
        by_label = {id2label.get(i, ""): p for i, p in enumerate(probs)}
        if set(by_label) >= {"entailment", "neutral", "contradiction"}:
            triple = (by_label["entailment"], by_label["neutral"], by_label["contradiction"])
        else:  # unknown label map: fall back to positional convention
            triple = (probs[0], probs[1], probs[2])
        total = sum(triple)
        return {
            "entailment": triple[0] / total,
            "neutral": triple[1] / total,
            "contradiction": triple[2] / total,
        }

    return infer
