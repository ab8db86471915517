"""Experiment harnesses and the seeded benchmark builders they run on."""

from __future__ import annotations

import csv
import io
import logging
import math
import random
import string
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .classifier import LabeledQuestion, Origin, QuestionClass, accuracy, mix_data, train
from .kb import KnowledgeBase, Node, Triple
from .lexicon import MentionLexicon
from .linker import LinkerWeights, ablate
from .records import QuestionRecord
from .schemas import SCHEMAS
from .scoring import SimilarityScorer
from .search import BeamConfig, beam_generate, path_key

log = logging.getLogger(__name__)


def _fmt(x: float) -> str:
    return "" if x is None or (isinstance(x, float) and math.isnan(x)) else f"{x:.6f}"


def _csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) if isinstance(v, float) else v for v in r])
    return buf.getvalue()


# beam sweep


@dataclass(frozen=True)
class BeamRow:
    beam_size: int | None       # None = exhaustive
    recall: float
    avg_paths: float
    reduction: float


def _gold_entities(rec: QuestionRecord) -> list[Node]:
    return rec.gold_path.topic_entities()


def beam_benchmark(
    kb: KnowledgeBase,
    questions: Sequence[QuestionRecord],
    scorer: SimilarityScorer,
    ks: Sequence[int | None],
    lex: MentionLexicon | None = None,
    apply_at_hops: Iterable[int] = (1,),
) -> list[BeamRow]:
    """Recall of the gold path and candidate counts per beam size.

    The exhaustive run (no pruning) is always computed as the baseline and
    appended as the last row when ``ks`` does not already contain ``None``.
    """
    usable = []
    for q in questions:
        if q.gold_path is None:
            log.warning("question %s has no gold path, skipped", q.id)
        else:
            usable.append(q)
    if not usable:
        raise ValueError("no question carries a gold path")
    hops = frozenset(apply_at_hops)

    def run(k):
        hit = total = 0
        for q in usable:
            schema = SCHEMAS[q.gold_path.schema]
            out = beam_generate(kb, q.question, schema, _gold_entities(q), scorer, BeamConfig(k, hops), lex)
            gold = path_key(q.gold_path)
            hit += any(path_key(sp.path) == gold for sp in out)
            total += len(out)
        return hit / len(usable), total / len(usable)

    _, full = run(None)
    order = [k for k in ks if k is not None] + [None]
    rows = []
    for k in order:
        rec, avg = run(k)
        red = 1.0 - avg / full if full else 0.0
        rows.append(BeamRow(k, rec, avg, red))
    return rows


def beam_csv(rows: Sequence[BeamRow]) -> str:
    return _csv(["beam_size", "recall", "avg_paths", "reduction"],
                [("inf" if r.beam_size is None else r.beam_size, r.recall, r.avg_paths, r.reduction) for r in rows])


# linking ablation


@dataclass(frozen=True)
class LinkQuestion:
    id: str
    question: str
    gold: tuple[str, ...]

    @property
    def label(self) -> QuestionClass:
        return QuestionClass.ONE_ENTITY if len(self.gold) == 1 else QuestionClass.MULTI_ENTITY


@dataclass(frozen=True)
class AblationRow:
    variant: str
    one_entity: float
    multi_entity: float


ABLATION_VARIANTS = ("baseline", "w/o f1", "w/o f2", "w/o f3", "w/o f4", "w/o f5")


def link_recall(engine, q: LinkQuestion, weights: LinkerWeights) -> float:
    """Share of gold entities among the first ``len(gold)`` distinct linked entities."""
    ranked = engine.topic_entities(engine.link(q.question, weights))
    top = set(ranked[:len(q.gold)])
    return len(top & set(q.gold)) / len(q.gold)


def ablation_harness(engine, questions: Sequence[LinkQuestion], weights: LinkerWeights | None = None) -> list[AblationRow]:
    """Baseline plus one row per zeroed feature, recall split by question class.

    A class with no questions reports NaN.
    """
    base = weights or engine.weights
    variants = [base] + [ablate(base, i) for i in range(1, 6)]
    rows = []
    for name, w in zip(ABLATION_VARIANTS, variants):
        per = {QuestionClass.ONE_ENTITY: [], QuestionClass.MULTI_ENTITY: []}
        for q in questions:
            per[q.label].append(link_recall(engine, q, w))
        mean = {c: (sum(v) / len(v) if v else float("nan")) for c, v in per.items()}
        rows.append(AblationRow(name, mean[QuestionClass.ONE_ENTITY], mean[QuestionClass.MULTI_ENTITY]))
    return rows


def ablation_csv(rows: Sequence[AblationRow]) -> str:
    return _csv(["variant", "one_entity", "multi_entity"], [(r.variant, r.one_entity, r.multi_entity) for r in rows])


def link_questions(records: Sequence[QuestionRecord]) -> list[LinkQuestion]:
    """Gold topic entities taken from each record's gold path."""
    out = []
    for r in records:
        if r.gold_path is None:
            log.warning("question %s has no gold path, skipped", r.id)
            continue
        ents = tuple(dict.fromkeys(n.label for n in r.gold_path.topic_entities() if not n.literal))
        if ents:
            out.append(LinkQuestion(r.id, r.question, ents))
    return out


# classifier data mixing


@dataclass
class MixRow:
    real_fraction: float
    synth_count: int
    n_train: int
    accuracy: float
    losses: list[float] = field(default_factory=list)


def data_mixing(
    real: Sequence[LabeledQuestion],
    synthetic: Sequence[LabeledQuestion],
    test: Sequence[LabeledQuestion],
    settings: Sequence[tuple[float, int]],
    epochs: int = 10,
    seed: int = 0,
) -> list[MixRow]:
    """Train one classifier per ``(real_fraction, synth_count)`` and score it on ``test``."""
    rows = []
    for frac, n_syn in settings:
        data = mix_data(real, synthetic, frac, n_syn, seed)
        res = train(data, epochs=epochs, seed=seed)
        rows.append(MixRow(frac, n_syn, len(data), accuracy(res.model, test), res.losses))
    return rows


def mixing_csv(rows: Sequence[MixRow]) -> str:
    return _csv(["real_fraction", "synth_count", "n_train", "accuracy"],
                [(r.real_fraction, r.synth_count, r.n_train, r.accuracy) for r in rows])


def loss_csv(losses: Sequence[float]) -> str:
    return _csv(["epoch", "loss"], [(i, float(x)) for i, x in enumerate(losses, 1)])


def labeled(records: Sequence[QuestionRecord], origin: Origin, count_fn) -> list[LabeledQuestion]:
    """Records with a class label turned into classifier examples; ``count_fn(record)``
    supplies the linked-candidate count."""
    return [LabeledQuestion(r.question, r.label, origin, count_fn(r)) for r in records if r.label is not None]


# benchmark KBs


def pseudo_word(rng: random.Random, length: int, capital: bool = False) -> str:
    w = "".join(rng.choice(string.ascii_lowercase) for _ in range(length))
    return w.capitalize() if capital else w


def _unique_words(rng: random.Random, n: int, length: int, capital: bool, taken: set) -> list[str]:
    out = []
    while len(out) < n:
        w = pseudo_word(rng, length, capital)
        if w not in taken:
            taken.add(w)
            out.append(w)
    return out


def typed_kb(
    n_entities: int = 200,
    n_relations: int = 40,
    n_types: int = 4,
    edges_per_entity: int = 6,
    n_literals: int = 0,
    seed: int = 0,
    name_length: int = 7,
) -> tuple[KnowledgeBase, MentionLexicon]:
    """Random KB whose relations each link one entity type to a different one,
    so a relation's direction is implied by the node it leaves.

    Entity names are unique capitalized pseudo-words of fixed length, relation
    names lowercase ones of the same length. With ``n_literals`` > 0 each
    entity also gets one attribute edge to a numeric literal.
    The lexicon maps every entity name to itself.
    """
    rng = random.Random(seed)
    taken: set[str] = set()
    ents = _unique_words(rng, n_entities, name_length, True, taken)
    rels = _unique_words(rng, n_relations, name_length, False, taken)
    etype = {e: i % n_types for i, e in enumerate(ents)}
    by_type: dict[int, list[str]] = {}
    for e in ents:
        by_type.setdefault(etype[e], []).append(e)
    sig = {}
    for r in rels:
        dom = rng.randrange(n_types)
        rng_t = rng.choice([t for t in range(n_types) if t != dom])
        sig[r] = (dom, rng_t)
    rels_from = {t: [r for r in rels if sig[r][0] == t] for t in range(n_types)}
    triples = []
    for e in ents:
        choices = rels_from[etype[e]]
        if not choices:
            continue
        for _ in range(edges_per_entity):
            r = rng.choice(choices)
            o = rng.choice(by_type[sig[r][1]])
            triples.append(Triple(Node.entity(e), r, Node.entity(o)))
    if n_literals:
        attrs = _unique_words(rng, max(1, n_types), name_length, False, taken)
        for e in ents:
            a = attrs[etype[e] % len(attrs)]
            triples.append(Triple(Node.entity(e), a, Node.lit(str(1000 + rng.randrange(n_literals)))))
    lex = MentionLexicon((e, e) for e in ents)
    return KnowledgeBase(triples), lex


def random_kb(n_triples: int, n_entities: int, n_relations: int, seed: int = 0, literal_rate: float = 0.0) -> KnowledgeBase:
    """Untyped random KB with short names; self-loops and parallel edges allowed."""
    rng = random.Random(seed)
    ents = [f"e{i}" for i in range(n_entities)]
    rels = [f"r{i}" for i in range(n_relations)]
    triples = []
    for _ in range(n_triples):
        s = Node.entity(rng.choice(ents))
        o = Node.lit(f"v{rng.randrange(n_entities)}") if rng.random() < literal_rate else Node.entity(rng.choice(ents))
        triples.append(Triple(s, rng.choice(rels), o))
    return KnowledgeBase(triples)


def _code(i: int, width: int = 3) -> str:
    out = ""
    for _ in range(width):
        i, r = divmod(i, 26)
        out = string.ascii_lowercase[r] + out
    return out


def discriminative_link_set(feature: int, n: int = 20) -> tuple[KnowledgeBase, MentionLexicon, list[LinkQuestion]]:
    """Linking questions where only ``feature`` (1..5) separates the gold entity
    from a distractor; every other feature ties.

    Distractor labels sort before gold labels, so once the feature is removed
    the tie-break picks the distractor.
    """
    if feature not in (1, 2, 3, 4, 5):
        raise ValueError(f"feature must be in 1..5, got {feature}")
    triples, pairs, qs = [], [], []
    for i in range(n):
        c = _code(i)
        gold, dis = "Zz" + c, "Aa" + c
        gm, dm = gold, dis
        if feature == 1:
            dm = "Kk" + c
            gm = dm + "qq"
        pairs += [(gm, gold), (dm, dis)]
        hg, hd = f"hub_{gold}", f"hub_{dis}"
        rel_g = "about" if feature == 4 else "p"
        rel_d = "ξψ" if feature == 4 else "p"
        triples += [Triple(Node.entity(gold), rel_g, Node.entity(hg)), Triple(Node.entity(dis), rel_d, Node.entity(hd))]
        if feature == 5:
            triples += [Triple(Node.entity(hg), "p", Node.entity(f"leaf{k}_{gold}")) for k in range(2)]
        text = {
            1: f"tell me about {gm}",
            2: f"tell me {dm} and {gm} {gm}",
            3: f"who is {gm} or {dm}",
            4: f"tell me about {gm} or {dm}",
            5: f"tell me {gm} or {dm}",
        }[feature]
        qs.append(LinkQuestion(f"f{feature}-{i:03d}", text, (gold,)))
    return KnowledgeBase(triples), MentionLexicon(pairs), qs
