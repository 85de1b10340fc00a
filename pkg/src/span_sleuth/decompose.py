"""Decompose an answer into atomic semantic units with character spans.

The primary path consumes semantic-role frames: each labeled argument (and
optionally the predicate itself) becomes one :class:`AtomicUnit`. Role
labelers return detokenized text ("Beijing , China") that rarely matches the
answer surface form byte-for-byte, so anchoring is whitespace-flexible; a
unit's ``text`` is always the exact answer substring its span covers.

When the role labeler yields nothing for a sentence, a plain dependency
parse can be converted into equivalent frames by a small rule table over
relation labels (:func:`srl_from_dependencies`); both paths then share the
same anchoring and unit construction.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence, Union

from .backends import SrlFrame
from .corpus import CharSpan
from .errors import MalformedTree, UnitNotFound
from .span_algebra import TokenAlignment, align_tokens

ROLE_ARG0 = "ARG0"
ROLE_ARG1 = "ARG1"
ROLE_ARG2 = "ARG2"
ROLE_TMP = "ARGM-TMP"
ROLE_LOC = "ARGM-LOC"
ROLE_VERB = "VERB"
ROLE_MISC = "ARGM-MISC"

KNOWN_ROLES = (ROLE_ARG0, ROLE_ARG1, ROLE_ARG2, ROLE_TMP, ROLE_LOC, ROLE_VERB)

_ROLE_ALIASES = {
    "A0": ROLE_ARG0,
    "A1": ROLE_ARG1,
    "A2": ROLE_ARG2,
    "AM-TMP": ROLE_TMP,
    "AM-LOC": ROLE_LOC,
    "V": ROLE_VERB,
    "PRED": ROLE_VERB,
    "REL": ROLE_VERB,
}

_YEAR_RE = re.compile(r"\b\d{3,4}\b")
_TEMPORAL_CUES = frozenset(
    {
        "year", "years", "century", "decade", "when", "during", "since",
        "until", "before", "after", "today", "yesterday", "tomorrow",
        "عام", "سنة", "منذ", "خلال", "اليوم", "أمس", "غدا",
    }
)


@dataclass(frozen=True)
class AtomicUnit:
    """One semantic-role unit anchored to its answer span.

    ``text`` is the answer substring at ``span`` (not the labeler's
    detokenized rendering) and ``token_indices`` are the generator-token
    indices whose aligned spans overlap it — possibly empty when alignment
    failed for every covering token.
    """

    role: str
    text: str
    span: CharSpan
    token_indices: tuple[int, ...]
    predicate: str

    def __post_init__(self):
        if not self.text:
            raise ValueError("unit text must be non-empty")


def normalize_role(raw: str) -> str:
    """Canonicalize a role label; anything outside the known set becomes
    ARGM-MISC so downstream code never meets a surprise label."""
    role = raw.strip().upper().replace("_", "-")
    role = _ROLE_ALIASES.get(role, role)
    if role.startswith("ARGM-") and role not in KNOWN_ROLES:
        return ROLE_MISC
    return role if role in KNOWN_ROLES else ROLE_MISC


def locate_unit(answer: str, unit_text: str, search_from: int = 0) -> Optional[CharSpan]:
    """Find ``unit_text`` in ``answer`` at or beyond ``search_from``.

    Matching is whitespace-flexible: the unit's whitespace-separated pieces
    may be joined by any (or no) whitespace in the answer, which absorbs
    detokenization artifacts like a space before a comma. Falls back to
    NFC-normalized pieces; offsets always index the original answer.
    """
    pieces = unit_text.split()
    if not pieces:
        return None
    for candidate in (pieces, [unicodedata.normalize("NFC", p) for p in pieces]):
        pattern = r"\s*".join(re.escape(p) for p in candidate)
        match = re.compile(pattern).search(answer, search_from)
        if match and match.end() > match.start():
            return CharSpan(match.start(), match.end())
    return None


class _Cursor:
    """Per-text moving anchor position, so a unit text that occurs twice in
    the answer anchors to successive occurrences rather than the first one
    twice."""

    def __init__(self, answer: str):
        self.answer = answer
        self._last_end: dict[str, int] = {}

    @staticmethod
    def _key(text: str) -> str:
        return unicodedata.normalize("NFC", " ".join(text.split()))

    def anchor(self, text: str) -> Optional[CharSpan]:
        key = self._key(text)
        start = self._last_end.get(key, 0)
        span = locate_unit(self.answer, text, start)
        if span is None and start > 0:
            span = locate_unit(self.answer, text, 0)
        if span is not None:
            self._last_end[key] = span.end
        return span


FrameLike = Union[SrlFrame, Mapping]


def _frame_fields(frame: FrameLike) -> tuple[str, list[tuple[str, str]]]:
    if isinstance(frame, SrlFrame):
        return frame.predicate, list(frame.arguments)
    predicate = frame["predicate"]
    arguments = []
    for arg in frame.get("arguments", []):
        if isinstance(arg, Mapping):
            arguments.append((arg["role"], arg["text"]))
        else:
            role, text = arg
            arguments.append((role, text))
    return predicate, arguments


def decompose_srl(
    answer: str,
    tokens: Sequence[str],
    frames: Sequence[FrameLike],
    include_verbs: bool = True,
    strict: bool = False,
) -> tuple[list[AtomicUnit], list[str]]:
    """Turn role frames into anchored atomic units.

    Returns units in answer order plus one diagnostic string per dropped
    item. A frame whose predicate cannot be anchored is dropped whole (its
    argument texts have no trustworthy neighborhood); an argument that
    cannot be anchored is dropped alone. With ``strict`` those drops raise
    UnitNotFound instead.
    """
    alignment: TokenAlignment = align_tokens(answer, tokens)
    cursor = _Cursor(answer)
    units: list[AtomicUnit] = []
    diagnostics: list[str] = []
    seen: set[tuple[str, int, int]] = set()

    def fail(message: str) -> None:
        if strict:
            raise UnitNotFound(message)
        diagnostics.append(message)

    for k, frame in enumerate(frames):
        predicate, arguments = _frame_fields(frame)
        predicate_span = cursor.anchor(predicate)
        if predicate_span is None:
            fail(f"frame {k}: predicate {predicate!r} not found in answer; frame dropped")
            continue
        parts: list[tuple[str, CharSpan]] = []
        if include_verbs:
            parts.append((ROLE_VERB, predicate_span))
        for raw_role, arg_text in arguments:
            if not arg_text.strip():
                fail(f"frame {k}: empty text for role {raw_role!r}; argument dropped")
                continue
            span = cursor.anchor(arg_text)
            if span is None:
                fail(
                    f"frame {k}: argument {arg_text!r} ({raw_role}) not found in answer;"
                    " argument dropped"
                )
                continue
            parts.append((normalize_role(raw_role), span))
        predicate_text = answer[predicate_span.start:predicate_span.end]
        for role, span in parts:
            fingerprint = (role, span.start, span.end)
            if fingerprint in seen:
                continue
            seen.add(fingerprint)
            units.append(
                AtomicUnit(
                    role=role,
                    text=answer[span.start:span.end],
                    span=span,
                    token_indices=tuple(alignment.indices_overlapping(span)),
                    predicate=predicate_text,
                )
            )
    units.sort(key=lambda u: (u.span.start, u.span.end, u.role))
    return units, diagnostics


# -- dependency-parse fallback ----------------------------------------------

@dataclass(frozen=True)
class DepNode:
    """One token of a dependency parse; ``head`` is 1-based, 0 for the root."""

    index: int
    form: str
    pos: str
    head: int
    rel: str

    @classmethod
    def from_raw(cls, raw: Mapping) -> "DepNode":
        try:
            return cls(
                index=int(raw["index"]),
                form=str(raw["form"]),
                pos=str(raw["pos"]),
                head=int(raw["head"]),
                rel=str(raw["rel"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedTree(f"bad dependency node {raw!r}: {exc}") from None


class DependencyTree:
    """Validated single-rooted dependency tree over 1..n token indices."""

    def __init__(self, nodes: dict[int, DepNode], root: int, children: dict[int, list[int]]):
        self.nodes = nodes
        self.root = root
        self.children = children

    @classmethod
    def from_nodes(cls, raw_nodes: Sequence[Mapping]) -> "DependencyTree":
        """Build and validate; raises MalformedTree for duplicate indices,
        dangling heads, zero or multiple roots, or a head cycle."""
        if not raw_nodes:
            raise MalformedTree("empty node list")
        nodes: dict[int, DepNode] = {}
        for raw in raw_nodes:
            node = DepNode.from_raw(raw)
            if node.index < 1:
                raise MalformedTree(f"node index must be >= 1, got {node.index}")
            if node.index in nodes:
                raise MalformedTree(f"duplicate node index {node.index}")
            nodes[node.index] = node
        roots = [i for i, n in nodes.items() if n.head == 0]
        if len(roots) != 1:
            raise MalformedTree(f"expected exactly one root, found {len(roots)}")
        children: dict[int, list[int]] = {i: [] for i in nodes}
        for node in nodes.values():
            if node.head != 0:
                if node.head not in nodes:
                    raise MalformedTree(
                        f"node {node.index} points at missing head {node.head}"
                    )
                if node.head == node.index:
                    raise MalformedTree(f"node {node.index} is its own head")
                children[node.head].append(node.index)
        for start in nodes:
            seen = set()
            current = start
            while current != 0:
                if current in seen:
                    raise MalformedTree(f"head cycle through node {current}")
                seen.add(current)
                current = nodes[current].head
        for kids in children.values():
            kids.sort()
        return cls(nodes=nodes, root=roots[0], children=children)

    def subtree(self, index: int) -> list[int]:
        """All indices in the subtree rooted at ``index``, sorted."""
        if index not in self.nodes:
            raise MalformedTree(f"no node with index {index}")
        out: list[int] = []
        stack = [index]
        while stack:
            current = stack.pop()
            out.append(current)
            stack.extend(self.children[current])
        return sorted(out)

    def phrase(self, index: int) -> str:
        """Surface rendering of a subtree: forms joined in token order."""
        return " ".join(self.nodes[i].form for i in self.subtree(index))


def _is_temporal(rel: str, phrase: str) -> bool:
    if rel.endswith("tmod"):
        return True
    if _YEAR_RE.search(phrase):
        return True
    words = {w.strip(",.;:!?؟«»\"'()").lower() for w in phrase.split()}
    return not words.isdisjoint(_TEMPORAL_CUES)


def _role_for(node: DepNode, phrase: str) -> Optional[str]:
    rel = node.rel.lower()
    if rel == "punct":
        return None
    if rel.startswith("nsubj") or rel.startswith("csubj"):
        return ROLE_ARG0
    if rel in ("obj", "dobj") or rel.startswith("ccomp") or rel.startswith("xcomp"):
        return ROLE_ARG1
    if rel == "iobj":
        return ROLE_ARG2
    if rel.startswith(("obl", "nmod", "advmod", "advcl")) or rel == "mod":
        return ROLE_TMP if _is_temporal(rel, phrase) else ROLE_LOC
    return ROLE_MISC


def srl_from_dependencies(
    raw_nodes: Sequence[Mapping], lang: str = "EN"
) -> tuple[list[SrlFrame], list[str]]:
    """Convert a dependency parse into SRL-style frames by rule.

    Each direct dependent of a verbal root becomes one argument: subjects
    map to ARG0, objects to ARG1, indirect objects to ARG2, obliques and
    modifiers to ARGM-TMP or ARGM-LOC depending on temporal evidence in the
    phrase, everything else to ARGM-MISC; punctuation is skipped. A sentence
    whose root is not verbal (a nominal sentence — routine in Arabic) has no
    predicate to frame: the result is no frames plus a diagnostic, not an
    error.
    """
    if not raw_nodes:
        return [], ["empty parse: no nodes"]
    tree = DependencyTree.from_nodes(raw_nodes)
    root = tree.nodes[tree.root]
    if root.pos.upper() not in ("VERB", "AUX"):
        return [], [
            f"nominal sentence: root {root.form!r} is {root.pos}, no predicate to decompose"
        ]
    arguments: list[tuple[str, str]] = []
    diagnostics: list[str] = []
    for child_index in tree.children[tree.root]:
        child = tree.nodes[child_index]
        phrase = tree.phrase(child_index)
        role = _role_for(child, phrase)
        if role is None:
            continue
        if role == ROLE_MISC:
            diagnostics.append(
                f"relation {child.rel!r} at node {child.index} has no dedicated role;"
                " kept as ARGM-MISC"
            )
        arguments.append((role, phrase))
    return [SrlFrame(predicate=root.form, arguments=arguments)], diagnostics
