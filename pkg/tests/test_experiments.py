import math

import pytest

from kbqa.classifier import LabeledQuestion, Origin, QuestionClass
from kbqa.experiments import (
    ABLATION_VARIANTS, ablation_csv, ablation_harness, beam_benchmark, beam_csv, data_mixing,
    discriminative_link_set, link_questions, mixing_csv, typed_kb,
)
from kbqa.pipeline import KBQA
from kbqa.records import QuestionRecord
from kbqa.schemas import SCHEMAS
from kbqa.scoring import NgramScorer
from kbqa.synth import generate


def test_typed_kb_relations_have_one_direction():
    kb, lex = typed_kb(100, 20, edges_per_entity=4, seed=2)
    subj_types, obj_types = {}, {}
    for t in kb:
        subj_types.setdefault(t.predicate, set()).add(t.subject.label)
        obj_types.setdefault(t.predicate, set()).add(t.object.label)
    for p in subj_types:
        assert not subj_types[p] & obj_types[p]
    assert len(lex) == 100


def test_beam_benchmark_rows():
    kb, lex = typed_kb(120, 20, edges_per_entity=6, seed=1)
    qs = generate(kb, lex, [SCHEMAS["S2"]], 30, seed=0)
    qs.append(QuestionRecord("nogold", "what?"))
    rows = beam_benchmark(kb, qs, NgramScorer(), [1, 2, 4], lex)
    assert [r.beam_size for r in rows] == [1, 2, 4, None]
    assert rows[-1].recall == 1.0 and rows[-1].reduction == 0.0
    for a, b in zip(rows, rows[1:]):
        assert a.recall <= b.recall and a.avg_paths <= b.avg_paths
    text = beam_csv(rows)
    assert text.splitlines()[0] == "beam_size,recall,avg_paths,reduction"
    assert text.splitlines()[-1].startswith("inf,1.000000")


def test_beam_benchmark_needs_gold():
    kb, lex = typed_kb(20, 5, seed=1)
    with pytest.raises(ValueError):
        beam_benchmark(kb, [QuestionRecord("a", "b")], NgramScorer(), [1], lex)


def test_ablation_structure():
    kb, lex, qs = discriminative_link_set(5, n=4)
    rows = ablation_harness(KBQA(kb, lex), qs)
    assert tuple(r.variant for r in rows) == ABLATION_VARIANTS
    assert all(math.isnan(r.multi_entity) for r in rows)
    lines = ablation_csv(rows).splitlines()
    assert lines[0] == "variant,one_entity,multi_entity"
    assert lines[1] == "baseline,1.000000,"
    assert len(lines) == 7


def test_link_questions_from_gold():
    kb, lex = typed_kb(80, 12, edges_per_entity=3, n_literals=5, seed=3)
    recs = generate(kb, lex, None, 40, seed=1)
    for lq, r in zip(link_questions(recs), recs):
        assert len(lq.gold) == SCHEMAS[r.schema].slots
        assert lq.label is SCHEMAS[r.schema].question_class


def test_data_mixing_rows():
    one, multi = QuestionClass.ONE_ENTITY, QuestionClass.MULTI_ENTITY
    real = [LabeledQuestion(f"what is r{i}", one if i % 2 else multi, Origin.REAL, 1 if i % 2 else 2) for i in range(20)]
    syn = [LabeledQuestion(f"tell s{i}", one if i % 2 else multi, Origin.SYNTHETIC, 1 if i % 2 else 2) for i in range(20)]
    rows = data_mixing(real, syn, real, [(0.5, 0), (0.5, 10)], epochs=3)
    assert [(r.n_train, len(r.losses)) for r in rows] == [(10, 3), (20, 3)]
    assert mixing_csv(rows).splitlines()[0] == "real_fraction,synth_count,n_train,accuracy"
