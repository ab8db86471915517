"""Artificial question construction over the predefined schemas."""

from __future__ import annotations

import json
import logging
import math
import random
from typing import Mapping, Sequence

from .execute import execute_path
from .kb import KnowledgeBase, Node
from .lexicon import MentionLexicon
from .records import SyntheticSample, write_questions
from .schemas import SCHEMAS, Hop, Schema, instantiate, verbalize

log = logging.getLogger(__name__)

MAX_ATTEMPTS = 50

# "{s}" is replaced by the path verbalization
TEMPLATES = {
    "en": {"default": ["what is the {s}?", "which is the {s}?", "who is the {s}?", "tell me the {s}?"]},
    "zh": {"default": ["{s}是什么？", "{s}是谁？", "{s}是哪个？"]},
}


class GenerationError(RuntimeError):
    pass


def load_templates(path) -> dict[str, list[str]]:
    """JSON object: schema id (or "default") -> list of templates containing "{s}"."""
    with open(path, encoding="utf-8") as fh:
        table = json.load(fh)
    for key, items in table.items():
        if not isinstance(items, list) or not all(isinstance(t, str) and "{s}" in t for t in items):
            raise ValueError(f"templates for {key!r} must be strings containing '{{s}}'")
    return table


def apportion(count: int, ratios: Mapping[str, float]) -> dict[str, int]:
    """Largest-remainder split of ``count`` by ``ratios`` (ties go to the earlier schema id)."""
    if abs(sum(ratios.values()) - 1.0) > 1e-9:
        raise ValueError(f"ratios sum to {sum(ratios.values())}, expected 1")
    if any(r < 0 for r in ratios.values()):
        raise ValueError("negative ratio")
    ids = sorted(ratios)
    quotas = {s: count * ratios[s] for s in ids}
    alloc = {s: math.floor(q) for s, q in quotas.items()}
    left = count - sum(alloc.values())
    for s in sorted(ids, key=lambda s: (-(quotas[s] - alloc[s]), s))[:left]:
        alloc[s] += 1
    return alloc


class _Walker:
    def __init__(self, kb: KnowledgeBase, lex: MentionLexicon | None, rng: random.Random):
        self.kb, self.rng = kb, rng
        pool = kb.entities()
        if lex is not None and len(lex):
            pool = [e for e in pool if lex.shortest_mention(e.label) is not None]
        self.pool = pool
        self.lex = lex

    def topic_ok(self, node: Node) -> bool:
        if node.literal:
            return False
        return self.lex is None or not len(self.lex) or self.lex.shortest_mention(node.label) is not None

    def step(self, nid: int, avoid=()):
        """Random step from ``nid``; ``avoid`` holds (triple, direction) pairs not to reverse."""
        options = [s for s in self.kb.steps(nid) if all(a != (s[3], s[1].opposite) for a in avoid)]
        if not options:
            return None
        return self.rng.choice(options)

    def hop(self, s, bound=False) -> Hop:
        pid, d, nxt, _ = s
        return Hop(self.kb.pred(pid), d, self.kb.node(nxt) if bound else None)

    def reverse_hop(self, s) -> Hop:
        pid, d, _, _ = s
        return Hop(self.kb.pred(pid), d.opposite)

    def walk(self, schema: Schema):
        if not self.pool:
            return None
        kb = self.kb
        e1 = self.rng.choice(self.pool)
        n1 = kb.node_id(e1)
        s1 = self.step(n1)
        if s1 is None:
            return None
        x1 = s1[2]
        sid = schema.id
        if sid == "S1":
            return [e1], [[self.hop(s1)]], []
        s2 = self.step(x1, [(s1[3], s1[1])])
        if s2 is None:
            return None
        n2 = kb.node(s2[2])
        if sid == "S2":
            return [e1], [[self.hop(s1), self.hop(s2)]], []
        if sid == "S3":
            # a linkable constraint would read as a second topic entity
            if self.lex is not None and len(self.lex) and self.topic_ok(n2):
                return None
            return [e1], [[self.hop(s1), self.hop(s2, bound=True)]], []
        if sid in {"S4", "S8", "S7"}:
            if not self.topic_ok(n2) or n2 == e1:
                return None
            if sid == "S8":
                return [e1, n2], [[self.hop(s1), self.hop(s2, bound=True)]], []
            if sid == "S4":
                return [e1, n2], [[self.hop(s1)], [self.reverse_hop(s2)]], []
            s3 = self.step(x1, [(s1[3], s1[1]), (s2[3], s2[1])])
            if s3 is None:
                return None
            n3 = kb.node(s3[2])
            if not self.topic_ok(n3) or n3 in (e1, n2):
                return None
            return [e1, n2, n3], [[self.hop(s1)], [self.reverse_hop(s2)], [self.reverse_hop(s3)]], []
        if sid == "S5":
            s3 = self.step(s2[2], [(s2[3], s2[1])])
            if s3 is None:
                return None
            n3 = kb.node(s3[2])
            if not self.topic_ok(n3) or n3 == e1:
                return None
            return [e1, n3], [[self.hop(s1), self.hop(s2)], [self.reverse_hop(s3)]], []
        if sid == "S6":
            if not self.topic_ok(n2) or n2 == e1:
                return None
            s3 = self.step(x1, [(s1[3], s1[1]), (s2[3], s2[1])])
            if s3 is None:
                return None
            return [e1, n2], [[self.hop(s1)], [self.reverse_hop(s2)]], [self.hop(s3)]
        raise ValueError(f"unknown schema {sid}")


def generate(
    kb: KnowledgeBase,
    lex: MentionLexicon | None,
    schemas: Sequence[Schema] | None,
    count: int,
    ratios: Mapping[str, float] | None = None,
    seed: int = 0,
    templates: Mapping[str, Sequence[str]] | None = None,
    language: str = "en",
    id_prefix: str = "syn",
) -> list[SyntheticSample]:
    """Random-walk instantiations of the schemas, verbalized into questions.

    Each sample's answers are the execution result of its gold path. A schema
    that fails ``MAX_ATTEMPTS`` walks in a row is dropped with a warning.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    schemas = list(schemas) if schemas is not None else list(SCHEMAS.values())
    if ratios is None:
        ratios = {s.id: 1.0 / len(schemas) for s in schemas}
    by_id = {s.id: s for s in schemas}
    unknown = set(ratios) - set(by_id)
    if unknown:
        raise ValueError(f"ratios name schemas not offered: {sorted(unknown)}")
    table = templates if templates is not None else TEMPLATES[language]
    plan = apportion(count, ratios)
    rng = random.Random(seed)
    walker = _Walker(kb, lex, rng)
    made: list[tuple[str, object, frozenset]] = []
    for sid in sorted(plan):
        schema = by_id[sid]
        for _ in range(plan[sid]):
            for _attempt in range(MAX_ATTEMPTS):
                w = walker.walk(schema)
                if w is None:
                    continue
                ents, hops, tail = w
                path = instantiate(schema, ents, hops, tail)
                answers = execute_path(kb, path)
                if answers:
                    made.append((sid, path, answers))
                    break
            else:
                log.warning("schema %s: no instantiation after %d attempts, skipping", sid, MAX_ATTEMPTS)
                break
    if not made:
        raise GenerationError("no schema could be instantiated on this KB")
    rng.shuffle(made)
    out = []
    for i, (sid, path, answers) in enumerate(made):
        options = table.get(sid) or table["default"]
        text = rng.choice(list(options)).replace("{s}", verbalize(path, lex))
        out.append(SyntheticSample(
            id=f"{id_prefix}-{i:05d}",
            question=text,
            answers=tuple(sorted(n.label for n in answers)),
            gold_path=path,
            label=by_id[sid].question_class,
            schema=sid,
        ))
    return out


def export(samples: Sequence[SyntheticSample], path) -> None:
    write_questions(samples, path)


def parse_ratios(text: str) -> dict[str, float]:
    """``"S1=0.2,S2=0.8"`` -> ``{"S1": 0.2, "S2": 0.8}``."""
    out = {}
    for part in text.split(","):
        if not part.strip():
            continue
        key, sep, val = part.partition("=")
        if not sep:
            raise ValueError(f"bad ratio {part!r}")
        out[key.strip()] = float(val)
    return out
