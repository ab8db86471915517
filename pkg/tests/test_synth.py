import collections
import logging

import pytest
from hypothesis import given, settings, strategies as st

from kbqa.classifier import QuestionClass
from kbqa.execute import execute_path
from kbqa.experiments import typed_kb
from kbqa.kb import Direction
from kbqa.lexicon import MentionLexicon
from kbqa.records import read_questions
from kbqa.schemas import SCHEMAS, Hop, instantiate
from kbqa.synth import GenerationError, apportion, export, generate, load_templates, parse_ratios

from conftest import E, make_kb

F, B = Direction.FORWARD, Direction.BACKWARD


def test_chain_single_walk(chain_kb):
    # the walk can start at either end; each yields one sample over the whole chain
    s = generate(chain_kb, None, [SCHEMAS["S2"]], 1, seed=0)[0]
    forward = instantiate(SCHEMAS["S2"], [E("A")], [[Hop("r1", F), Hop("r2", F)]])
    backward = instantiate(SCHEMAS["S2"], [E("C")], [[Hop("r2", B), Hop("r1", B)]])
    assert (s.gold_path, s.answers) in {(forward, ("C",)), (backward, ("A",))}
    lex = MentionLexicon([("a", "A")])
    s = generate(chain_kb, lex, [SCHEMAS["S2"]], 1, seed=0)[0]
    assert s.gold_path == forward and s.answers == ("C",)


def test_only_s1_is_one_entity():
    kb, lex = typed_kb(60, 10, edges_per_entity=2, seed=1)
    out = generate(kb, lex, [SCHEMAS["S1"]], 100, {"S1": 1.0}, seed=2)
    assert len(out) == 100
    assert all(s.label is QuestionClass.ONE_ENTITY and s.schema == "S1" for s in out)


def test_deterministic_and_sound():
    kb, lex = typed_kb(80, 12, edges_per_entity=3, n_literals=10, seed=3)
    a = generate(kb, lex, None, 400, seed=9)
    assert a == generate(kb, lex, None, 400, seed=9)
    assert a != generate(kb, lex, None, 400, seed=10)
    for s in a:
        assert tuple(sorted(n.label for n in execute_path(kb, s.gold_path))) == s.answers
        assert s.label is SCHEMAS[s.schema].question_class
        assert "{" not in s.question
    assert len({s.id for s in a}) == 400


def test_ratio_fidelity():
    kb, lex = typed_kb(80, 12, edges_per_entity=3, seed=3)
    ratios = {"S1": 0.5, "S2": 0.3, "S4": 0.2}
    out = generate(kb, lex, [SCHEMAS[s] for s in ratios], 33, ratios, seed=0)
    got = collections.Counter(s.schema for s in out)
    for sid, r in ratios.items():
        assert abs(got[sid] - 33 * r) < 1


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 500), st.lists(st.integers(0, 20), min_size=1, max_size=8))
def test_apportion(count, weights):
    if sum(weights) == 0:
        return
    ratios = {f"S{i}": w / sum(weights) for i, w in enumerate(weights)}
    ratios[f"S{len(weights) - 1}"] += 1.0 - sum(ratios.values())
    alloc = apportion(count, ratios)
    assert sum(alloc.values()) == count
    assert all(abs(alloc[k] - count * r) < 1 for k, r in ratios.items())


def test_ratio_errors(chain_kb):
    with pytest.raises(ValueError):
        apportion(10, {"S1": 0.5})
    with pytest.raises(ValueError):
        generate(chain_kb, None, [SCHEMAS["S1"]], 0)
    with pytest.raises(ValueError):
        generate(chain_kb, None, [SCHEMAS["S1"]], 5, {"S2": 1.0})
    assert parse_ratios("S1=0.25, S2=0.75") == {"S1": 0.25, "S2": 0.75}


def test_unreachable_schema_skipped(chain_kb, caplog):
    with caplog.at_level(logging.WARNING):
        out = generate(chain_kb, None, [SCHEMAS["S1"], SCHEMAS["S7"]], 4, seed=0)
    assert {s.schema for s in out} == {"S1"}
    assert "S7" in caplog.text
    with pytest.raises(GenerationError):
        generate(chain_kb, None, [SCHEMAS["S7"]], 2)


def test_s3_constraint_not_linkable():
    kb, lex = typed_kb(80, 12, edges_per_entity=3, n_literals=10, seed=3)
    for s in generate(kb, lex, [SCHEMAS["S3"]], 50, seed=1):
        term = s.gold_path.branches[0].hops[-1].terminal
        assert term.literal or lex.shortest_mention(term.label) is None


def test_chinese_templates():
    kb = make_kb(("中国", "首都", "北京"))
    s = generate(kb, None, [SCHEMAS["S1"]], 1, language="zh", seed=0)[0]
    assert "首都" in s.question


def test_export_roundtrip(tmp_path):
    kb, lex = typed_kb(100, 12, edges_per_entity=3, n_literals=10, seed=4)
    out = generate(kb, lex, None, 5000, seed=0)
    p = tmp_path / "syn.jsonl"
    export(out, p)
    assert read_questions(p) == out
    export([], tmp_path / "empty.jsonl")
    assert (tmp_path / "empty.jsonl").read_text() == ""


def test_template_file(tmp_path):
    p = tmp_path / "t.json"
    p.write_text('{"default": ["Q: {s}"]}')
    assert load_templates(p) == {"default": ["Q: {s}"]}
    p.write_text('{"default": ["no slot"]}')
    with pytest.raises(ValueError):
        load_templates(p)
