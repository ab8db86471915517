import random
import sys
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from kbqa.config import Config
from kbqa.kb import Direction
from kbqa.pipeline import (
    KBQA, NO_CANDIDATE_PATH, NO_MENTION, SCORER_FAILURE, Answer, evaluate, f1, prf, rank_candidates, report_csv,
)
from kbqa.schemas import SCHEMAS, Hop, instantiate
from kbqa.scoring import ExternalScorer, NgramScorer
from kbqa.search import ScoredPath

from conftest import E

STUB = [sys.executable, str(Path(__file__).with_name("stub_scorer.py"))]
F = Direction.FORWARD


def test_who_directed_avatar(movie_kb, movie_lex):
    eng = KBQA(movie_kb, movie_lex, Config(beam_k=0))
    a = eng.answer("Who directed Avatar?")
    assert a.answers == {"Avatar_dir"}
    assert a.reason is None
    assert a.path.path.schema == "S1"


def test_misspelled_mention(movie_kb, movie_lex):
    a = KBQA(movie_kb, movie_lex).answer("director_of Avator")
    assert a.answers == {"Avatar_dir"}
    assert a.topic_entities == ("Avatar",)


def test_no_mention(movie_kb, movie_lex):
    a = KBQA(movie_kb, movie_lex).answer("What is the weather like?")
    assert a.answers == frozenset() and a.reason == NO_MENTION


def test_no_candidate_path(movie_lex):
    from kbqa.kb import KnowledgeBase
    a = KBQA(KnowledgeBase(), movie_lex).answer("Who directed Avatar?")
    assert a.reason == NO_CANDIDATE_PATH and not a.answers


def test_scorer_failure(movie_kb, movie_lex):
    with ExternalScorer(STUB + ["short"]) as bad:
        a = KBQA(movie_kb, movie_lex, scorer=bad).answer("Who directed Avatar?")
    assert a.reason == SCORER_FAILURE and not a.answers


def test_include_kb_subjects(movie_kb):
    from kbqa.lexicon import MentionLexicon
    eng = KBQA(movie_kb, MentionLexicon(), Config(lexicon_include_kb_subjects=True))
    assert eng.answer("wife_of Avatar_dir").answers == {"Suzy"}


def sp(verb, score=0.0):
    path = instantiate(SCHEMAS["S1"], [E(verb.split()[-1])], [[Hop(verb.split()[0], F)]])
    return ScoredPath(path, verb, score)


def test_rank_single_and_exact():
    one = sp("r A")
    assert rank_candidates("anything", [one], NgramScorer()).path == one.path
    best = rank_candidates("born_in X", [sp("wife_of X"), sp("born_in X")], NgramScorer())
    assert best.verbalization == "born_in X"
    assert rank_candidates("q", [], NgramScorer()) is None


def test_rank_matches_recomputed_argmax():
    rng = random.Random(4)
    words = ["alpha", "beta", "gamma", "delta", "eps"]
    cands = [sp(f"{rng.choice(words)}{i % 3} {rng.choice(words).upper()}") for i in range(20)]
    q = "which gamma1 of DELTA"
    s = NgramScorer()
    want = max(cands, key=lambda c: (s.score(q, c.verbalization), [-ord(ch) for ch in c.verbalization]))
    assert rank_candidates(q, cands, s).verbalization == want.verbalization


def test_metric_values():
    assert f1({"a", "b"}, {"b", "c"}) == 0.5
    assert f1({"x"}, {"x"}) == 1.0
    assert f1(set(), {"x"}) == 0.0
    assert prf({"a"}, {"b"}) == (0.0, 0.0, 0.0)


def test_evaluate_missing_gold():
    with pytest.raises(KeyError):
        evaluate([Answer("q1", "?")], {})


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.frozensets(st.sampled_from("abcd")), st.frozensets(st.sampled_from("abcd"), min_size=1)),
                min_size=1, max_size=8), st.randoms())
def test_evaluate_permutation_invariant(pairs, rnd):
    answers = [Answer(f"q{i}", "?", p) for i, (p, _) in enumerate(pairs)]
    gold = {f"q{i}": g for i, (_, g) in enumerate(pairs)}
    rep = evaluate(answers, gold)
    shuffled = list(answers)
    rnd.shuffle(shuffled)
    assert evaluate(shuffled, gold).avg_f1 == pytest.approx(rep.avg_f1)
    assert 0.0 <= rep.avg_f1 <= 1.0
    assert rep.avg_f1 == pytest.approx(sum(r.f1 for r in rep.rows) / len(rep.rows))


def test_report_csv_layout(movie_kb, movie_lex):
    eng = KBQA(movie_kb, movie_lex)
    answers = [eng.answer("Who directed Avatar?", "q1"), eng.answer("nothing here", "q2")]
    rep = evaluate(answers, {"q1": ["Avatar_dir"], "q2": ["x"]})
    lines = report_csv(answers, rep).splitlines()
    assert lines[0].startswith("id,precision,recall,f1")
    assert lines[1].startswith("q1,1.000000,1.000000,1.000000,one-entity,S1")
    assert lines[-1].startswith("__average__,0.500000,0.500000,0.500000")
    assert "no-mention=1" in lines[-1]


def test_concurrent_matches_serial(movie_kb, movie_lex):
    from kbqa.records import QuestionRecord
    recs = [QuestionRecord(f"q{i}", q) for i, q in enumerate(["Who directed Avatar?", "born_in British", "zzz"] * 4)]
    eng = KBQA(movie_kb, movie_lex)
    serial = [(a.qid, a.answers, a.reason) for a in eng.answer_all(recs, 1)]
    par = [(a.qid, a.answers, a.reason) for a in eng.answer_all(recs, 4)]
    assert serial == par
