"""Query path generation: schema-constrained beam search and an exhaustive enumerator."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

from .kb import Direction, KnowledgeBase, Node
from .lexicon import MentionLexicon
from .schemas import (
    Branch,
    Hop,
    Join,
    QueryPath,
    Schema,
    path_to_json,
    verbalize,
)
from .scoring import SimilarityScorer

log = logging.getLogger(__name__)


class ScoredPath(NamedTuple):
    path: QueryPath
    verbalization: str
    score: float


@dataclass(frozen=True)
class BeamConfig:
    """``beam_size=None`` disables pruning."""

    beam_size: int | None = 5
    apply_at_hops: frozenset[int] = field(default_factory=lambda: frozenset({1}))

    def __post_init__(self):
        if self.beam_size is not None and self.beam_size < 1:
            raise ValueError("beam size must be >= 1")
        object.__setattr__(self, "apply_at_hops", frozenset(self.apply_at_hops))


def path_key(path: QueryPath) -> str:
    return json.dumps(path_to_json(path), sort_keys=True, ensure_ascii=False)


def _order(sp: ScoredPath):
    return (-sp.score, sp.verbalization, path_key(sp.path))


@dataclass
class _Partial:
    hops: tuple[tuple[Hop, ...], ...]   # per branch, including the one in progress
    tail: tuple[Hop, ...]
    states: frozenset                   # (node id, arrival step) pairs at the walk head
    join: frozenset | None              # node ids where finished branches agree

    def path(self, schema: Schema, roots: Sequence[Node]) -> QueryPath:
        branches = tuple(Branch(roots[i], h) for i, h in enumerate(self.hops))
        return QueryPath(schema.id, branches, schema.join, self.tail)


def _step_groups(kb: KnowledgeBase, states, keep_target: bool):
    """Group the next steps of all walk heads by relation and direction.

    Steps that go straight back along the arrival edge are skipped. With
    ``keep_target`` the target node is part of the key (bound terminals).
    """
    groups: dict[tuple, set] = {}
    for nid, arrived in states:
        for pid, d, nxt, tkey in kb.steps(nid):
            if arrived is not None and arrived == (tkey, d.opposite):
                continue
            key = (pid, d, nxt) if keep_target else (pid, d)
            groups.setdefault(key, set()).add((nxt, (tkey, d)))
    return groups


def _roots(kb: KnowledgeBase, schema: Schema, entities: Sequence) -> list[Node] | None:
    nodes = [e if isinstance(e, Node) else Node.entity(e) for e in entities]
    if len(nodes) != schema.slots:
        raise ValueError(f"{schema.id} needs {schema.slots} topic entities, got {len(nodes)}")
    missing = [n.label for n in nodes if kb.node_id(n) is None]
    if missing:
        log.warning("topic entity not in KB: %s", ", ".join(missing))
        return None
    return nodes


def _extend(kb: KnowledgeBase, schema: Schema, roots: list[Node], p: _Partial, b: int, j: int) -> list[_Partial]:
    if b == -1:
        states = frozenset((n, None) for n in p.join) if j == 0 else p.states
    elif j == 0:
        states = frozenset({(kb.node_id(roots[b]), None)})
    else:
        states = p.states
    bound = b == 0 and j == schema.hops[0] - 1 and schema.bound is not None
    target = kb.node_id(roots[1]) if bound and schema.bound == "entity" else None
    out = []
    for key, nxt in sorted(_step_groups(kb, states, bound).items(), key=lambda kv: _group_sort(kb, kv[0])):
        pid, d = key[0], key[1]
        if bound:
            if target is not None and key[2] != target:
                continue
            hop = Hop(kb.pred(pid), d, kb.node(key[2]))
        else:
            hop = Hop(kb.pred(pid), d)
        nxt = frozenset(nxt)
        join = p.join
        if b == -1:
            hops, tail = p.hops, p.tail + (hop,)
        else:
            branch = (p.hops[b] if j > 0 else ()) + (hop,)
            hops, tail = p.hops[:b] + (branch,), p.tail
            if j == schema.hops[b] - 1 and not bound:
                ends = frozenset(n for n, _ in nxt)
                join = ends if join is None else join & ends
                if not join:
                    continue
        out.append(_Partial(hops, tail, nxt, join))
    return out


def _group_sort(kb, key):
    d = key[1]
    extra = kb.node(key[2]).sort_key() if len(key) > 2 else ()
    return (kb.pred(key[0]), d.value, extra)


def beam_generate(
    kb: KnowledgeBase,
    question: str,
    schema: Schema,
    entities: Sequence,
    scorer: SimilarityScorer,
    cfg: BeamConfig = BeamConfig(),
    lex: MentionLexicon | None = None,
) -> list[ScoredPath]:
    """Expand the schema hop by hop, pruning to the top ``beam_size`` partial
    paths at the hops listed in ``cfg.apply_at_hops`` (1-based)."""
    roots = _roots(kb, schema, entities)
    if roots is None:
        return []
    partials = [_Partial((), (), frozenset(), None)]
    positions = schema.hop_positions()
    scored: list[ScoredPath] = []
    for t, (b, j) in enumerate(positions, 1):
        nxt = [q for p in partials for q in _extend(kb, schema, roots, p, b, j)]
        last = t == len(positions)
        prune = cfg.beam_size is not None and t in cfg.apply_at_hops
        if not nxt:
            return []
        if prune or last:
            paths = [q.path(schema, roots) for q in nxt]
            texts = [verbalize(path, lex, roots) for path in paths]
            scores = [min(1.0, max(0.0, float(s))) for s in scorer.score_batch(question, texts)]
            if len(scores) != len(texts):
                raise ValueError("scorer returned wrong number of scores")
            ranked = sorted(zip(nxt, (ScoredPath(*x) for x in zip(paths, texts, scores))),
                            key=lambda pair: _order(pair[1]))
            if prune:
                ranked = ranked[:cfg.beam_size]
            nxt = [q for q, _ in ranked]
            scored = [sp for _, sp in ranked]
        partials = nxt
    return scored


# exhaustive enumeration, written against the label-level neighbour lists


def _walks(kb: KnowledgeBase, start: Node, nhops: int) -> list[list[tuple[str, Direction, Node]]]:
    out = []

    def rec(node, prev, walk):
        if len(walk) == nhops:
            out.append(list(walk))
            return
        for d in (Direction.FORWARD, Direction.BACKWARD):
            for p, other in kb.neighbors(node, d):
                triple = (node, p, other) if d is Direction.FORWARD else (other, p, node)
                if prev is not None and prev == (triple, d.opposite):
                    continue
                walk.append((p, d, other))
                rec(other, (triple, d), walk)
                walk.pop()

    rec(start, None, [])
    return out


def _chain_paths(kb, root, nhops, bind_last=False, must_end=None):
    """Map hop tuples to the set of walk end nodes."""
    result: dict[tuple[Hop, ...], set[Node]] = {}
    for walk in _walks(kb, root, nhops):
        if must_end is not None and walk[-1][2] != must_end:
            continue
        hops = tuple(
            Hop(p, d, node if (bind_last and i == nhops - 1) else None)
            for i, (p, d, node) in enumerate(walk)
        )
        result.setdefault(hops, set()).add(walk[-1][2])
    return result


def brute_force_generate(kb: KnowledgeBase, question: str, schema: Schema, entities: Sequence) -> list[QueryPath]:
    """Every schema-conforming path with a non-empty match, no pruning."""
    roots = _roots(kb, schema, entities)
    if roots is None:
        return []
    paths: list[QueryPath] = []
    if schema.bound == "constraint":
        for hops in _chain_paths(kb, roots[0], schema.hops[0], bind_last=True):
            paths.append(QueryPath(schema.id, (Branch(roots[0], hops),), schema.join))
    elif schema.bound == "entity":
        for hops in _chain_paths(kb, roots[0], schema.hops[0], bind_last=True, must_end=roots[1]):
            paths.append(QueryPath(schema.id, (Branch(roots[0], hops),), schema.join))
    else:
        per_branch = [_chain_paths(kb, roots[i], n) for i, n in enumerate(schema.hops)]

        def combos(i, chosen, common):
            if i == len(per_branch):
                yield chosen, common
                return
            for hops, ends in per_branch[i].items():
                nxt = set(ends) if common is None else common & ends
                if nxt:
                    yield from combos(i + 1, chosen + [hops], nxt)

        for chosen, common in combos(0, [], None):
            branches = tuple(Branch(roots[i], h) for i, h in enumerate(chosen))
            if schema.join is Join.VIA_INTERMEDIATE:
                tails = set()
                for node in common:
                    for d in (Direction.FORWARD, Direction.BACKWARD):
                        tails |= {Hop(p, d) for p, _ in kb.neighbors(node, d)}
                for hop in tails:
                    paths.append(QueryPath(schema.id, branches, schema.join, (hop,)))
            else:
                paths.append(QueryPath(schema.id, branches, schema.join))
    return sorted(paths, key=path_key)


def max_fanout(kb: KnowledgeBase) -> int:
    return kb.max_degree()


def generate_all(
    kb: KnowledgeBase,
    question: str,
    assignments: Iterable[tuple[Schema, Sequence]],
    scorer: SimilarityScorer,
    cfg: BeamConfig,
    lex: MentionLexicon | None = None,
) -> list[ScoredPath]:
    """Beam generation over several schema assignments, merged in score order."""
    out: list[ScoredPath] = []
    for schema, ents in assignments:
        out += beam_generate(kb, question, schema, ents, scorer, cfg, lex)
    return sorted(out, key=_order)

