"""Linear-chain CRF over binary topic-entity labels.

Emission scores come from a pluggable scorer; the default marks tokens covered
by a lexicon mention. Transition matrices are 4x4: labels 0 and 1 plus the
virtual START (row 2) and STOP (column 3) states.
"""

from __future__ import annotations

import functools
import itertools
import math
from typing import NamedTuple, Protocol, Sequence

import numpy as np

from .lexicon import MentionLexicon, TokenizedQuestion, find_mentions

NUM_LABELS = 2
START = 2
STOP = 3
MAX_ENUM_LENGTH = 20


class LabelSequence(NamedTuple):
    labels: tuple[int, ...]
    score: float


def _check(P, A):
    P = np.asarray(P, dtype=float)
    A = np.asarray(A, dtype=float)
    if P.ndim != 2 or P.shape[1] != NUM_LABELS or P.shape[0] < 1:
        raise ValueError(f"emission matrix must be n x 2 with n >= 1, got {P.shape}")
    if A.shape != (NUM_LABELS + 2, NUM_LABELS + 2):
        raise ValueError(f"transition matrix must be 4 x 4, got {A.shape}")
    if not (np.isfinite(P).all() and np.isfinite(A).all()):
        raise ValueError("non-finite score")
    return P, A


def zero_transitions() -> np.ndarray:
    return np.zeros((NUM_LABELS + 2, NUM_LABELS + 2))


def sequence_score(P, A, y: Sequence[int]) -> float:
    P, A = _check(P, A)
    if len(y) != P.shape[0]:
        raise ValueError(f"label sequence has length {len(y)}, expected {P.shape[0]}")
    score = A[START, y[0]] + A[y[-1], STOP]
    for a, b in zip(y, y[1:]):
        score += A[a, b]
    for i, lab in enumerate(y):
        score += P[i, lab]
    return float(score)


def viterbi_decode(P, A) -> LabelSequence:
    """Highest-scoring label sequence; among ties, the lexicographically smallest.

    Runs the DP right to left (best suffix score per label) and then picks
    labels greedily left to right, preferring 0 when scores are equal.
    """
    P, A = _check(P, A)
    n = P.shape[0]
    suffix = np.empty((n, NUM_LABELS))
    suffix[n - 1] = P[n - 1] + A[:NUM_LABELS, STOP]
    for i in range(n - 2, -1, -1):
        for a in range(NUM_LABELS):
            suffix[i, a] = P[i, a] + max(A[a, b] + suffix[i + 1, b] for b in range(NUM_LABELS))

    def pick(prev, i):
        vals = [A[prev, b] + suffix[i, b] for b in range(NUM_LABELS)]
        return max(range(NUM_LABELS), key=lambda b: (vals[b], -b))

    labels = [pick(START, 0)]
    for i in range(1, n):
        labels.append(pick(labels[-1], i))
    return LabelSequence(tuple(labels), sequence_score(P, A, labels))


def log_partition(P, A) -> float:
    """log Z by enumerating all 2^n label sequences."""
    P, A = _check(P, A)
    return _log_partition(P.tobytes(), A.tobytes(), P.shape[0])


@functools.lru_cache(maxsize=64)
def _log_partition(pb: bytes, ab: bytes, n: int) -> float:
    if n > MAX_ENUM_LENGTH:
        raise ValueError(f"sequence length {n} exceeds enumeration limit {MAX_ENUM_LENGTH}")
    P = np.frombuffer(pb).reshape(n, NUM_LABELS)
    A = np.frombuffer(ab).reshape(NUM_LABELS + 2, NUM_LABELS + 2)
    Y = np.array(list(itertools.product(range(NUM_LABELS), repeat=n)))
    scores = P[np.arange(n), Y].sum(axis=1) + A[START, Y[:, 0]] + A[Y[:, -1], STOP]
    if n > 1:
        scores += A[Y[:, :-1], Y[:, 1:]].sum(axis=1)
    m = scores.max()
    return float(m + math.log(np.exp(scores - m).sum()))


def crf_potential(P, A, y: Sequence[int]) -> float:
    """p(y | x) with the partition function computed by enumeration."""
    P, A = _check(P, A)
    if P.shape[0] > MAX_ENUM_LENGTH:
        raise ValueError(f"sequence length {P.shape[0]} exceeds enumeration limit {MAX_ENUM_LENGTH}")
    return math.exp(sequence_score(P, A, y) - log_partition(P, A))


class EmissionScorer(Protocol):
    def __call__(self, tq: TokenizedQuestion, lex: MentionLexicon) -> np.ndarray: ...


def default_emissions(tq: TokenizedQuestion, lex: MentionLexicon) -> np.ndarray:
    spans = [(m.start, m.end) for m in find_mentions(tq, lex)]
    P = np.empty((max(len(tq.tokens), 1), NUM_LABELS))
    P[:, 1] = -1.0
    for i, tok in enumerate(tq.tokens):
        if any(s <= tok.start and tok.end <= e for s, e in spans):
            P[i, 1] = 1.0
    P[:, 0] = -P[:, 1]
    return P


class ExternalEmissions:
    """Emission scorer backed by a similarity scorer process.

    The token texts are sent as candidates against the question; a returned
    score ``s`` in [0, 1] becomes ``P[i, 1] = 2s - 1`` and ``P[i, 0] = -P[i, 1]``.
    """

    def __init__(self, scorer):
        self.scorer = scorer

    def __call__(self, tq: TokenizedQuestion, lex: MentionLexicon) -> np.ndarray:
        scores = self.scorer.score_batch(tq.text, [t.text for t in tq.tokens])
        P = np.empty((max(len(tq.tokens), 1), NUM_LABELS))
        P[:, 1] = -1.0
        for i, s in enumerate(scores):
            P[i, 1] = 2.0 * s - 1.0
        P[:, 0] = -P[:, 1]
        return P


def tagged_spans(tq: TokenizedQuestion, labels: Sequence[int]) -> list[tuple[int, int]]:
    """Character spans of maximal runs of tokens labelled 1."""
    spans = []
    for tok, lab in zip(tq.tokens, labels):
        if lab != 1:
            continue
        if spans and spans[-1][1] == tok.start:
            spans[-1] = (spans[-1][0], tok.end)
        else:
            spans.append((tok.start, tok.end))
    return spans
