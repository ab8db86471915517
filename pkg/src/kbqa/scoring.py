"""Question/path similarity scorers.

``NgramScorer`` is the built-in deterministic scorer. ``ExternalScorer`` talks
to a child process over line-delimited JSON so a neural text-matching model
can be plugged in:

    request:  {"q": "<question>", "c": ["<cand1>", ...]}
    reply:    {"scores": [s1, ...]}
"""

from __future__ import annotations

import json
import math
import shlex
import subprocess
import threading
from collections import Counter
from typing import Protocol, Sequence


class ScorerError(RuntimeError):
    pass


class SimilarityScorer(Protocol):
    def score_batch(self, question: str, candidates: Sequence[str]) -> list[float]: ...


def char_ngrams(text: str, n: int = 2) -> Counter:
    return Counter(text[i:i + n] for i in range(len(text) - n + 1))


def dice(a: Counter, b: Counter) -> float:
    total = sum(a.values()) + sum(b.values())
    if total == 0:
        return 1.0
    return 2.0 * sum((a & b).values()) / total


class NgramScorer:
    """Dice coefficient of character n-gram multisets."""

    def __init__(self, n: int = 2):
        if n < 1:
            raise ValueError("n must be >= 1")
        self.n = n

    def score(self, question: str, candidate: str) -> float:
        return self.score_batch(question, [candidate])[0]

    def score_batch(self, question: str, candidates: Sequence[str]) -> list[float]:
        q = char_ngrams(question, self.n)
        qn = sum(q.values())
        out = []
        for c in candidates:
            if c == question:
                out.append(1.0)
                continue
            g = char_ngrams(c, self.n)
            total = qn + sum(g.values())
            out.append(2.0 * sum((q & g).values()) / total if total else 0.0)
        return out


def ngram_scorer(n: int = 2) -> NgramScorer:
    return NgramScorer(n)


def _clamp(x: float) -> float:
    return min(1.0, max(0.0, x))


class ExternalScorer:
    """Scorer served by a long-lived child process; calls are serialized."""

    def __init__(self, command: str | Sequence[str]):
        self.argv = shlex.split(command) if isinstance(command, str) else list(command)
        self._lock = threading.Lock()
        self._proc: subprocess.Popen | None = None

    def _start(self):
        if self._proc is None or self._proc.poll() is not None:
            self._proc = subprocess.Popen(
                self.argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                text=True, encoding="utf-8", bufsize=1,
            )
        return self._proc

    def score_batch(self, question: str, candidates: Sequence[str]) -> list[float]:
        if not candidates:
            return []
        req = json.dumps({"q": question, "c": list(candidates)}, ensure_ascii=False)
        with self._lock:
            proc = self._start()
            try:
                proc.stdin.write(req + "\n")
                proc.stdin.flush()
                line = proc.stdout.readline()
            except (BrokenPipeError, OSError) as exc:
                raise ScorerError(f"scorer process failed: {exc}") from exc
        if not line:
            raise ScorerError(f"scorer process exited (code {proc.poll()})")
        try:
            scores = json.loads(line)["scores"]
        except (ValueError, KeyError, TypeError) as exc:
            raise ScorerError(f"malformed scorer reply: {line.strip()[:200]!r}") from exc
        if not isinstance(scores, list) or len(scores) != len(candidates):
            raise ScorerError(f"scorer returned {len(scores) if isinstance(scores, list) else '?'} scores "
                              f"for {len(candidates)} candidates")
        try:
            vals = [float(s) for s in scores]
        except (TypeError, ValueError) as exc:
            raise ScorerError("non-numeric score in reply") from exc
        if not all(math.isfinite(v) for v in vals):
            raise ScorerError("non-finite score in reply")
        return [_clamp(v) for v in vals]

    def close(self):
        if self._proc is not None:
            if self._proc.stdin:
                self._proc.stdin.close()
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()
            if self._proc.stdout:
                self._proc.stdout.close()
            self._proc = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def __del__(self):
        try:
            self.close()
        except Exception:
            pass


def external_scorer(command: str | Sequence[str]) -> ExternalScorer:
    return ExternalScorer(command)


def dice_server_main() -> None:
    """Reference scorer process implementing bigram Dice over the wire protocol."""
    import sys

    scorer = NgramScorer(2)
    for line in sys.stdin:
        req = json.loads(line)
        print(json.dumps({"scores": scorer.score_batch(req["q"], req["c"])}), flush=True)


if __name__ == "__main__":
    dice_server_main()
