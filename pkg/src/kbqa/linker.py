"""Candidate topic-entity scoring with five hand-built features and a linear layer."""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Sequence

from .kb import Direction, KnowledgeBase, Node, two_hop_path_count
from .lexicon import Mention

DEFAULT_WEIGHTS = (1.0, 1.0, -1.0, 1.0, 1.0)
DEFAULT_TOP_K = 5
DEFAULT_INTERROGATIVES = ("谁", "哪", "什么", "几", "who", "what", "which", "where", "when")
FEATURE_NAMES = ("f1", "f2", "f3", "f4", "f5")


@dataclass(frozen=True)
class LinkerWeights:
    w: tuple[float, ...] = DEFAULT_WEIGHTS

    def __post_init__(self):
        if len(self.w) != 5 or not all(math.isfinite(x) for x in self.w):
            raise ValueError(f"need five finite weights, got {self.w!r}")

    def masked(self, mask: Sequence[int]) -> "LinkerWeights":
        return LinkerWeights(tuple(x if keep else 0.0 for x, keep in zip(self.w, mask)))


def ablate(weights: LinkerWeights, index: int) -> LinkerWeights:
    """Zero the weight of feature ``index`` (1-based)."""
    if index not in (1, 2, 3, 4, 5):
        raise ValueError(f"feature index must be in 1..5, got {index}")
    w = list(weights.w)
    w[index - 1] = 0.0
    return LinkerWeights(tuple(w))


@dataclass(frozen=True)
class CandidateEntity:
    mention: str
    start: int
    end: int
    entity: str
    raw: tuple[float, ...]
    normalized: tuple[float, ...] = (0.0,) * 5
    score: float = 0.0

    @property
    def f1(self):
        return self.raw[0]

    @property
    def f5(self):
        return self.raw[4]


def feature_f1(mention: str) -> float:
    return float(len(mention))


def feature_f2(mention: str, question: str) -> float:
    if not question:
        raise ValueError("empty question")
    return question.count(mention) / len(question) if mention else 0.0


def _interrogative_pattern(words: Iterable[str]):
    parts = []
    for w in sorted(set(words), key=lambda w: (-len(w), w)):
        esc = re.escape(w)
        parts.append(rf"\b{esc}\b" if w.isascii() and w.isalpha() else esc)
    return re.compile("|".join(parts), re.IGNORECASE) if parts else None


def feature_f3(span: tuple[int, int], question: str, interrogatives: Iterable[str] = DEFAULT_INTERROGATIVES) -> float:
    """Character gap between the mention span and the nearest interrogative word."""
    pat = _interrogative_pattern(interrogatives)
    start, end = span
    best = None
    if pat is not None:
        for m in pat.finditer(question):
            if m.end() <= start:
                gap = start - m.end()
            elif m.start() >= end:
                gap = m.start() - end
            else:
                gap = 0
            best = gap if best is None else min(best, gap)
    return float(len(question) if best is None else best)


def _default_label_tokens(label: str) -> list[str]:
    return [t for t in re.split(r"[\W_]+", label) if t]


def feature_f4(
    question_tokens: Sequence[str],
    entity,
    kb: KnowledgeBase,
    label_tokens: Callable[[str], list[str]] = _default_label_tokens,
) -> float:
    """Dice overlap of question tokens with the tokens of predicates around ``entity``.

    Each distinct predicate in the 1-hop neighbourhood contributes its tokens
    once. Whitespace-only tokens are ignored on both sides.
    """
    preds = {p for p, _ in kb.neighbors(entity, Direction.FORWARD)}
    preds |= {p for p, _ in kb.neighbors(entity, Direction.BACKWARD)}
    if not preds:
        return 0.0
    q = Counter(t for t in question_tokens if t.strip())
    r = Counter(t for p in sorted(preds) for t in label_tokens(p) if t.strip())
    denom = sum(q.values()) + sum(r.values())
    return 2.0 * sum((q & r).values()) / denom if denom else 0.0


def feature_f5(entity, kb: KnowledgeBase) -> float:
    return math.sqrt(two_hop_path_count(kb, entity))


def raw_features(
    mention: Mention,
    entity: str,
    question: str,
    question_tokens: Sequence[str],
    kb: KnowledgeBase,
    interrogatives: Iterable[str] = DEFAULT_INTERROGATIVES,
    label_tokens: Callable[[str], list[str]] = _default_label_tokens,
) -> tuple[float, ...]:
    node = Node.entity(entity)
    return (
        feature_f1(mention.text),
        feature_f2(mention.text, question),
        feature_f3((mention.start, mention.end), question, interrogatives),
        feature_f4(question_tokens, node, kb, label_tokens),
        feature_f5(node, kb),
    )


def normalize_features(rows: Sequence[Sequence[float]]) -> list[tuple[float, ...]]:
    """Min-max scale each column to [0, 1]; a constant column becomes 0.5."""
    if not rows:
        return []
    cols = list(zip(*rows))
    scaled = []
    for col in cols:
        lo, hi = min(col), max(col)
        scaled.append([0.5 if hi == lo else (v - lo) / (hi - lo) for v in col])
    return [tuple(r) for r in zip(*scaled)]


def rank_candidates(cands: Sequence[CandidateEntity], weights: LinkerWeights) -> list[CandidateEntity]:
    norm = normalize_features([c.raw for c in cands])
    scored = [
        replace(c, normalized=n, score=sum(w * f for w, f in zip(weights.w, n)))
        for c, n in zip(cands, norm)
    ]
    return sorted(scored, key=lambda c: (-c.score, c.entity, c.start, c.end))


def link_entities(
    mentions: Sequence[Mention],
    question: str,
    kb: KnowledgeBase,
    weights: LinkerWeights = LinkerWeights(),
    k: int = DEFAULT_TOP_K,
    question_tokens: Sequence[str] | None = None,
    interrogatives: Iterable[str] = DEFAULT_INTERROGATIVES,
    label_tokens: Callable[[str], list[str]] = _default_label_tokens,
) -> list[CandidateEntity]:
    """Score every (mention, entity) pair and return the top ``k``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if not mentions:
        return []
    if question_tokens is None:
        question_tokens = _default_label_tokens(question)
    interrogatives = tuple(interrogatives)
    cands = [
        CandidateEntity(m.text, m.start, m.end, e,
                        raw_features(m, e, question, question_tokens, kb, interrogatives, label_tokens))
        for m in mentions
        for e in m.entities
    ]
    return rank_candidates(cands, weights)[:k]
