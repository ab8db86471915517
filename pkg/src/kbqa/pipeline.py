"""End-to-end question answering, answer-set evaluation and reports."""

from __future__ import annotations

import csv
import io
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from . import tagger
from .classifier import LinearClassifier, QuestionClass, classify
from .config import Config
from .execute import execute_path
from .kb import KnowledgeBase
from .lexicon import MentionLexicon, find_mentions, lexicon_from_kb, tokenize
from .linker import CandidateEntity, LinkerWeights, link_entities
from .records import QuestionRecord
from .schemas import schemas_for
from .scoring import ExternalScorer, NgramScorer, ScorerError, SimilarityScorer
from .search import BeamConfig, ScoredPath, beam_generate, path_key

log = logging.getLogger(__name__)

NO_MENTION = "no-mention"
NO_CANDIDATE_PATH = "no-candidate-path"
SCORER_FAILURE = "scorer-failure"


@dataclass
class Answer:
    qid: str
    question: str
    answers: frozenset[str] = frozenset()
    path: ScoredPath | None = None
    reason: str | None = None
    question_class: QuestionClass | None = None
    topic_entities: tuple[str, ...] = ()
    candidates: list[ScoredPath] = field(default_factory=list, repr=False)


def rank_candidates(question: str, candidates: Sequence[ScoredPath], scorer: SimilarityScorer) -> ScoredPath | None:
    """Re-score every candidate's verbalization and return the best one.

    Ties go to the lexicographically smallest verbalization. ``None`` when
    there is nothing to rank.
    """
    if not candidates:
        return None
    scores = scorer.score_batch(question, [c.verbalization for c in candidates])
    rescored = [c._replace(score=min(1.0, max(0.0, float(s)))) for c, s in zip(candidates, scores)]
    return min(rescored, key=lambda c: (-c.score, c.verbalization, path_key(c.path)))


def _make_scorer(kind: str, n: int, command: str) -> SimilarityScorer:
    if kind == "external":
        if not command:
            raise ValueError("external scorer needs a command")
        return ExternalScorer(command)
    return NgramScorer(n)


class KBQA:
    """The question answering engine over one KB and lexicon."""

    def __init__(
        self,
        kb: KnowledgeBase,
        lex: MentionLexicon,
        cfg: Config | None = None,
        model: LinearClassifier | None = None,
        scorer: SimilarityScorer | None = None,
        ranker: SimilarityScorer | None = None,
    ):
        self.kb = kb
        self.cfg = cfg or Config()
        if self.cfg.lexicon_include_kb_subjects:
            lex = lex.merged(lexicon_from_kb(kb, normalize=lex.normalize))
        self.lex = lex
        if model is None and self.cfg.classifier_model:
            model = LinearClassifier.load(self.cfg.classifier_model)
        self.model = model
        self.scorer = scorer or _make_scorer(self.cfg.scorer, self.cfg.scorer_n, self.cfg.scorer_command)
        if ranker is None:
            ranker = self.scorer if self.cfg.ranker_scorer == "same" else _make_scorer(
                self.cfg.ranker_scorer, self.cfg.scorer_n, self.cfg.ranker_command)
        self.ranker = ranker
        if self.cfg.tagger_emissions == "external":
            self.emissions = tagger.ExternalEmissions(ExternalScorer(self.cfg.tagger_command))
        else:
            self.emissions = tagger.default_emissions
        self.transitions = tagger.zero_transitions()
        self.weights = LinkerWeights(tuple(self.cfg.linker_weights))
        k = self.cfg.beam_k
        self.beam = BeamConfig(k if k > 0 else None, frozenset(self.cfg.beam_hops))

    def label_tokens(self, label: str) -> list[str]:
        return [t.text for t in tokenize(label, self.lex).tokens]

    def mentions(self, question: str):
        tq = tokenize(question, self.lex)
        ments = find_mentions(tq, self.lex)
        if not ments:
            return tq, []
        P = self.emissions(tq, self.lex)
        labels = tagger.viterbi_decode(P, self.transitions).labels
        spans = tagger.tagged_spans(tq, labels)
        kept = [m for m in ments if any(m.start < e and s < m.end for s, e in spans)]
        return tq, kept

    def link(self, question: str, weights: LinkerWeights | None = None) -> list[CandidateEntity]:
        tq, ments = self.mentions(question)
        return link_entities(
            ments, question, self.kb, weights or self.weights, self.cfg.linker_top_k,
            question_tokens=tq.words, interrogatives=self.cfg.linker_interrogatives,
            label_tokens=self.label_tokens,
        )

    @staticmethod
    def topic_entities(cands: Sequence[CandidateEntity]) -> list[str]:
        seen: dict[str, None] = {}
        for c in cands:
            seen.setdefault(c.entity, None)
        return list(seen)

    def linked_count(self, question: str) -> int:
        return len(self.topic_entities(self.link(question)))

    def classify(self, question: str, n_candidates: int) -> QuestionClass:
        if self.model is None:
            return QuestionClass.ONE_ENTITY if n_candidates <= 1 else QuestionClass.MULTI_ENTITY
        return classify(self.model, question, n_candidates)

    def answer(self, question: str, qid: str = "", keep_candidates: bool = False) -> Answer:
        ans = Answer(qid, question)
        cands = self.link(question)
        if not cands:
            ans.reason = NO_MENTION
            return ans
        ents = self.topic_entities(cands)
        cls = self.classify(question, len(ents))
        mask = self.cfg.linker_mask_one_entity if cls is QuestionClass.ONE_ENTITY else self.cfg.linker_mask_multi_entity
        if any(not m for m in mask):
            ents = self.topic_entities(self.link(question, self.weights.masked(mask)))
        ans.question_class = cls
        ans.topic_entities = tuple(ents)
        assignments = schemas_for(cls, len(ents), self.cfg.schemas_enabled)
        try:
            generated: list[ScoredPath] = []
            for schema, idx in assignments:
                generated += beam_generate(self.kb, question, schema, [ents[i] for i in idx],
                                           self.scorer, self.beam, self.lex)
            best = rank_candidates(question, generated, self.ranker)
        except ScorerError as exc:
            log.warning("question %s: %s", qid, exc)
            ans.reason = SCORER_FAILURE
            return ans
        if keep_candidates:
            ans.candidates = generated
        if best is None:
            ans.reason = NO_CANDIDATE_PATH
            return ans
        ans.path = best
        ans.answers = frozenset(n.label for n in execute_path(self.kb, best.path))
        return ans

    def answer_all(self, records: Sequence[QuestionRecord], workers: int | None = None) -> list[Answer]:
        workers = workers or self.cfg.workers
        if workers <= 1:
            return [self.answer(r.question, r.id) for r in records]
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(lambda r: self.answer(r.question, r.id), records))


def answer_question(engine: KBQA, question: str, qid: str = "") -> Answer:
    return engine.answer(question, qid)


# evaluation


@dataclass(frozen=True)
class QuestionScore:
    qid: str
    precision: float
    recall: float
    f1: float


@dataclass
class EvalReport:
    rows: list[QuestionScore]
    failures: dict[str, int]

    @property
    def avg_f1(self) -> float:
        return sum(r.f1 for r in self.rows) / len(self.rows) if self.rows else 0.0

    @property
    def avg_precision(self) -> float:
        return sum(r.precision for r in self.rows) / len(self.rows) if self.rows else 0.0

    @property
    def avg_recall(self) -> float:
        return sum(r.recall for r in self.rows) / len(self.rows) if self.rows else 0.0


def prf(pred, gold) -> tuple[float, float, float]:
    """Answer-set precision, recall, F1. Empty predictions score 0 precision."""
    pred, gold = set(pred), set(gold)
    hit = len(pred & gold)
    p = hit / len(pred) if pred else 0.0
    r = hit / len(gold) if gold else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f


def f1(pred, gold) -> float:
    return prf(pred, gold)[2]


def evaluate(answers: Sequence[Answer], gold: Mapping[str, Sequence[str]]) -> EvalReport:
    rows = []
    failures: dict[str, int] = {}
    for a in answers:
        if a.qid not in gold:
            raise KeyError(f"no gold answers for question {a.qid!r}")
        p, r, f = prf(a.answers, gold[a.qid])
        rows.append(QuestionScore(a.qid, p, r, f))
        if a.reason:
            failures[a.reason] = failures.get(a.reason, 0) + 1
    return EvalReport(rows, dict(sorted(failures.items())))


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def report_csv(answers: Sequence[Answer], report: EvalReport) -> str:
    """Per-question rows followed by an ``__average__`` row."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["id", "precision", "recall", "f1", "class", "schema", "reason", "path", "answers"])
    for a, row in zip(answers, report.rows):
        w.writerow([
            row.qid, _fmt(row.precision), _fmt(row.recall), _fmt(row.f1),
            a.question_class.value if a.question_class else "",
            a.path.path.schema if a.path else "",
            a.reason or "",
            a.path.verbalization if a.path else "",
            "|".join(sorted(a.answers)),
        ])
    w.writerow(["__average__", _fmt(report.avg_precision), _fmt(report.avg_recall), _fmt(report.avg_f1),
                "", "", ";".join(f"{k}={v}" for k, v in report.failures.items()), "", ""])
    return buf.getvalue()

