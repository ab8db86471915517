"""One-entity vs multi-entity question classifier (hashed n-gram perceptron)."""

from __future__ import annotations

import enum
import functools
import hashlib
import math
import random
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

DEFAULT_DIM = 2 ** 16


class QuestionClass(enum.Enum):
    ONE_ENTITY = "one-entity"
    MULTI_ENTITY = "multi-entity"

    @property
    def sign(self) -> int:
        return 1 if self is QuestionClass.MULTI_ENTITY else -1


class Origin(enum.Enum):
    REAL = "real"
    SYNTHETIC = "synthetic"


@dataclass(frozen=True)
class LabeledQuestion:
    text: str
    label: QuestionClass
    origin: Origin = Origin.REAL
    n_candidates: int = 0


def _bucket(n: int) -> str:
    return f"\x00count={min(max(n, 0), 3)}"


@functools.lru_cache(maxsize=1 << 18)
def _hash(key: str, seed: int, dim: int) -> int:
    salt = (seed & (2 ** 128 - 1)).to_bytes(16, "little")
    h = hashlib.blake2b(key.encode("utf-8"), digest_size=8, salt=salt)
    return int.from_bytes(h.digest(), "little") & (dim - 1)


def ngram_keys(text: str) -> list[str]:
    """Character 2-grams and 3-grams, with repeats."""
    return [text[i:i + n] for n in (2, 3) for i in range(len(text) - n + 1)]


def featurize(text: str, n_candidates: int, dim: int = DEFAULT_DIM, seed: int = 0) -> dict[int, float]:
    """Sparse hashed feature vector: n-gram counts plus a candidate-count bucket (0, 1, 2, 3+)."""
    vec: dict[int, float] = {}
    for key in ngram_keys(text) + [_bucket(n_candidates)]:
        idx = _hash(key, seed, dim)
        vec[idx] = vec.get(idx, 0.0) + 1.0
    return vec


@dataclass
class LinearClassifier:
    weights: np.ndarray
    bias: float = 0.0
    seed: int = 0

    def __post_init__(self):
        dim = len(self.weights)
        if dim < 1 or dim & (dim - 1):
            raise ValueError(f"feature dimension must be a power of two, got {dim}")

    @classmethod
    def zeros(cls, dim: int = DEFAULT_DIM, seed: int = 0) -> "LinearClassifier":
        return cls(np.zeros(dim), 0.0, seed)

    @property
    def dim(self) -> int:
        return len(self.weights)

    def margin(self, vec: dict[int, float]) -> float:
        return float(sum(self.weights[i] * v for i, v in vec.items()) + self.bias)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"{self.dim} {self.seed} {self.bias!r}\n")
            for i in np.flatnonzero(self.weights):
                fh.write(f"{i}:{float(self.weights[i])!r}\n")

    @classmethod
    def load(cls, path) -> "LinearClassifier":
        with open(path, encoding="utf-8") as fh:
            tokens = fh.read().split()
        if len(tokens) < 3:
            raise ValueError(f"{path}: truncated model file")
        dim, seed, bias = int(tokens[0]), int(tokens[1]), float(tokens[2])
        w = np.zeros(dim)
        for tok in tokens[3:]:
            i, _, v = tok.partition(":")
            w[int(i)] = float(v)
        return cls(w, bias, seed)

    def __eq__(self, other):
        return (isinstance(other, LinearClassifier) and self.bias == other.bias
                and self.seed == other.seed and np.array_equal(self.weights, other.weights))


@dataclass
class TrainResult:
    model: LinearClassifier
    losses: list[float] = field(default_factory=list)
    accuracies: list[float] = field(default_factory=list)


def classify(model: LinearClassifier, text: str, n_candidates: int) -> QuestionClass:
    m = model.margin(featurize(text, n_candidates, model.dim, model.seed))
    return QuestionClass.MULTI_ENTITY if m > 0 else QuestionClass.ONE_ENTITY


def accuracy(model: LinearClassifier, data: Sequence[LabeledQuestion]) -> float:
    if not data:
        return float("nan")
    return sum(classify(model, q.text, q.n_candidates) is q.label for q in data) / len(data)


def train(
    data: Sequence[LabeledQuestion],
    epochs: int = 10,
    lr: float = 1.0,
    seed: int = 0,
    dim: int = DEFAULT_DIM,
) -> TrainResult:
    """Online perceptron. ``losses[e]`` is the mean perceptron loss ``max(0, -y*margin)``
    seen during epoch ``e``; ``accuracies[e]`` is training accuracy after it."""
    if not data:
        raise ValueError("no training data")
    if len({q.label for q in data}) < 2:
        raise ValueError("training data must contain both classes")
    model = LinearClassifier.zeros(dim, seed)
    vecs = [featurize(q.text, q.n_candidates, dim, seed) for q in data]
    ys = [q.label.sign for q in data]
    rng = random.Random(seed)
    order = list(range(len(data)))
    result = TrainResult(model)
    for _ in range(epochs):
        rng.shuffle(order)
        loss = 0.0
        for i in order:
            m = model.margin(vecs[i])
            pred = 1 if m > 0 else -1
            loss += max(0.0, -ys[i] * m)
            if pred != ys[i]:
                for j, v in vecs[i].items():
                    model.weights[j] += lr * ys[i] * v
                model.bias += lr * ys[i]
        result.losses.append(loss / len(data))
        result.accuracies.append(
            sum((1 if model.margin(v) > 0 else -1) == y for v, y in zip(vecs, ys)) / len(data))
    return result


MIX_PRESETS = {0.1: 50, 0.5: 500, 1.0: 3750}


def mix_data(real: Sequence, synthetic: Sequence, real_fraction: float, synth_count: int, seed: int = 0) -> list:
    """Seeded subsample of ``ceil(r * len(real))`` real items plus the first
    ``synth_count`` synthetic items after a seeded shuffle."""
    if not 0 < real_fraction <= 1:
        raise ValueError(f"real fraction must be in (0, 1], got {real_fraction}")
    if synth_count > len(synthetic) or synth_count < 0:
        raise ValueError(f"requested {synth_count} synthetic items, only {len(synthetic)} available")
    rng = random.Random(seed)
    n_real = math.ceil(real_fraction * len(real))
    keep = sorted(rng.sample(range(len(real)), n_real))
    synth = list(synthetic)
    rng.shuffle(synth)
    return [real[i] for i in keep] + synth[:synth_count]
