"""Query-graph schemas and the query path types built from them.

Shapes (``x`` is the answer, ``t`` an unrecorded intermediate, ``c`` a constant
constraint found during search):

    S1  e1 -r11- x
    S2  e1 -r11- t -r12- x
    S3  e1 -r11- x -r12- c
    S4  e1 -r11- x,  e2 -r21- x
    S5  e1 -r11- t -r12- x,  e2 -r21- x
    S6  e1 -r11- t,  e2 -r21- t,  t -t1- x
    S7  e1 -r11- x,  e2 -r21- x,  e3 -r31- x
    S8  e1 -r11- x -r12- e2

Every hop may run in either direction. S3 and S8 are single chains whose last
hop ends on a fixed node; in S8 that node is the second topic entity.
"""

from __future__ import annotations

import enum
import itertools
import logging
import re
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .classifier import QuestionClass
from .kb import Direction, Node
from .lexicon import MentionLexicon

log = logging.getLogger(__name__)


class Join(enum.Enum):
    AT_ANSWER = "answer"
    VIA_INTERMEDIATE = "intermediate"


@dataclass(frozen=True)
class Hop:
    relation: str
    direction: Direction
    terminal: Node | None = None


@dataclass(frozen=True)
class Branch:
    root: Node
    hops: tuple[Hop, ...]


@dataclass(frozen=True)
class QueryPath:
    schema: str
    branches: tuple[Branch, ...]
    join: Join = Join.AT_ANSWER
    tail: tuple[Hop, ...] = ()

    def hops(self) -> list[Hop]:
        return [h for b in self.branches for h in b.hops] + list(self.tail)

    def topic_entities(self) -> list[Node]:
        s = SCHEMAS[self.schema]
        ents = [b.root for b in self.branches]
        if s.bound == "entity" and self.branches and self.branches[0].hops[-1:]:
            term = self.branches[0].hops[-1].terminal
            if term is not None:
                ents.append(term)
        return ents


@dataclass(frozen=True)
class Schema:
    id: str
    slots: int
    hops: tuple[int, ...]
    join: Join
    template: str
    tail: int = 0
    # answer position inside branch 0 (hop index it follows); None means the branch end
    answer_hop: int | None = None
    # fixed terminal on the last hop of branch 0: None, "constraint" or "entity"
    bound: str | None = None

    @property
    def num_hops(self) -> int:
        return sum(self.hops) + self.tail

    @property
    def question_class(self) -> QuestionClass:
        return QuestionClass.ONE_ENTITY if self.slots == 1 else QuestionClass.MULTI_ENTITY

    def hop_positions(self) -> list[tuple[int, int]]:
        """Expansion order: ``(branch, hop)`` pairs, tail hops use branch -1."""
        pos = [(b, j) for b, n in enumerate(self.hops) for j in range(n)]
        return pos + [(-1, j) for j in range(self.tail)]


_BUILTIN = (
    Schema("S1", 1, (1,), Join.AT_ANSWER, "{r11} {e1}"),
    Schema("S2", 1, (2,), Join.AT_ANSWER, "{r12} {r11} {e1}"),
    Schema("S3", 1, (2,), Join.AT_ANSWER, "{r11} {e1} {r12} {c1}", answer_hop=0, bound="constraint"),
    Schema("S4", 2, (1, 1), Join.AT_ANSWER, "{r11} {e1} {r21} {e2}"),
    Schema("S5", 2, (2, 1), Join.AT_ANSWER, "{r12} {r11} {e1} {r21} {e2}"),
    Schema("S6", 2, (1, 1), Join.VIA_INTERMEDIATE, "{t1} {r11} {e1} {r21} {e2}", tail=1),
    Schema("S7", 3, (1, 1, 1), Join.AT_ANSWER, "{r11} {e1} {r21} {e2} {r31} {e3}"),
    Schema("S8", 2, (2,), Join.AT_ANSWER, "{r11} {e1} {r12} {e2}", answer_hop=0, bound="entity"),
)
SCHEMAS: dict[str, Schema] = {s.id: s for s in _BUILTIN}
ONE_ENTITY_SCHEMAS = ("S1", "S2", "S3")
PAIR_SCHEMAS = ("S4", "S5", "S6", "S8")
TRIPLE_SCHEMAS = ("S7",)


def builtin_schemas() -> list[Schema]:
    return list(_BUILTIN)


def schemas_for(
    cls: QuestionClass, n: int, enabled: Sequence[str] | None = None
) -> list[tuple[Schema, tuple[int, ...]]]:
    """Schema instantiations over candidate indices ``0..n-1``."""
    ok = set(enabled) if enabled is not None else set(SCHEMAS)
    out = []
    if cls is QuestionClass.ONE_ENTITY:
        for sid in ONE_ENTITY_SCHEMAS:
            if sid in ok:
                out += [(SCHEMAS[sid], (i,)) for i in range(n)]
        return out
    if n < 2:
        log.warning("multi-entity question with %d candidate entities: no schema applies", n)
        return []
    for sid in PAIR_SCHEMAS:
        if sid in ok:
            out += [(SCHEMAS[sid], pair) for pair in itertools.permutations(range(n), 2)]
    for sid in TRIPLE_SCHEMAS:
        if sid in ok:
            out += [(SCHEMAS[sid], trio) for trio in itertools.combinations(range(n), 3)]
    return out


def _mention(node: Node, lex: MentionLexicon | None) -> str:
    if node.literal or lex is None:
        return node.label
    return lex.shortest_mention(node.label) or node.label


def slot_values(path: QueryPath, lex: MentionLexicon | None = None) -> dict[str, str]:
    """Placeholder values available on a (possibly partial) path."""
    schema = SCHEMAS[path.schema]
    vals = {}
    for i, b in enumerate(path.branches):
        vals[f"e{i + 1}"] = _mention(b.root, lex)
        for j, h in enumerate(b.hops):
            vals[f"r{i + 1}{j + 1}"] = h.relation
    for j, h in enumerate(path.tail):
        vals[f"t{j + 1}"] = h.relation
    if schema.bound and path.branches and len(path.branches[0].hops) == schema.hops[0]:
        term = path.branches[0].hops[-1].terminal
        if term is not None:
            vals["c1" if schema.bound == "constraint" else "e2"] = _mention(term, lex)
    return vals


_PLACEHOLDER = re.compile(r"\{(\w+)\}")


def verbalize(path: QueryPath, lex: MentionLexicon | None = None, entity_slots: Sequence[Node] = ()) -> str:
    """Fill the schema template; placeholders not yet known are dropped.

    ``entity_slots`` supplies topic-entity mentions for slots that a partial
    path has not reached yet (e.g. ``e2`` of S8 before its last hop).
    """
    vals = slot_values(path, lex)
    for i, node in enumerate(entity_slots):
        vals.setdefault(f"e{i + 1}", _mention(node, lex))
    text = _PLACEHOLDER.sub(lambda m: vals.get(m.group(1), ""), SCHEMAS[path.schema].template)
    return " ".join(text.split())


def instantiate(schema: Schema, entities: Sequence[Node], hops: Sequence[Sequence[Hop]], tail: Sequence[Hop] = ()) -> QueryPath:
    """Build a path from per-branch hop lists, checking the schema's shape."""
    nbranch = len(schema.hops)
    if len(hops) != nbranch or any(len(h) != n for h, n in zip(hops, schema.hops)):
        raise ValueError(f"hop counts do not match {schema.id}")
    if len(tail) != schema.tail:
        raise ValueError(f"{schema.id} expects {schema.tail} tail hops")
    if len(entities) != schema.slots:
        raise ValueError(f"{schema.id} expects {schema.slots} topic entities")
    branches = tuple(Branch(entities[i], tuple(hops[i])) for i in range(nbranch))
    path = QueryPath(schema.id, branches, schema.join, tuple(tail))
    validate(path)
    if schema.bound == "entity" and branches[0].hops[-1].terminal != entities[1]:
        raise ValueError(f"{schema.id}: last hop must end at the second topic entity")
    return path


def validate(path: QueryPath) -> None:
    schema = SCHEMAS.get(path.schema)
    if schema is None:
        raise ValueError(f"unknown schema {path.schema!r}")
    if path.join is not schema.join:
        raise ValueError(f"{schema.id} joins {schema.join.value}, path says {path.join.value}")
    if len(path.branches) != len(schema.hops) or len(path.tail) != schema.tail:
        raise ValueError(f"path shape does not match {schema.id}")
    for i, (b, n) in enumerate(zip(path.branches, schema.hops)):
        if len(b.hops) != n:
            raise ValueError(f"{schema.id} branch {i} needs {n} hops, has {len(b.hops)}")
        if b.root.literal:
            raise ValueError("branch root must be an entity")
        for j, h in enumerate(b.hops):
            fixed = i == 0 and j == n - 1 and schema.bound is not None
            if fixed and h.terminal is None:
                raise ValueError(f"{schema.id}: last hop of branch 0 must be bound")
            if not fixed and h.terminal is not None:
                raise ValueError(f"{schema.id}: unexpected bound terminal at branch {i} hop {j}")
    if any(h.terminal is not None for h in path.tail):
        raise ValueError("tail hops cannot be bound")


# query patterns


class Var(NamedTuple):
    name: str


Term = Node | Var
ANSWER = Var("x")


def path_patterns(path: QueryPath) -> tuple[list[tuple[Term, str, Term]], Var]:
    """Compile a complete path into ``(subject, predicate, object)`` patterns."""
    validate(path)
    schema = SCHEMAS[path.schema]
    join_var = ANSWER if schema.join is Join.AT_ANSWER else Var("t")
    patterns = []

    def add(a: Term, h: Hop, b: Term):
        patterns.append((a, h.relation, b) if h.direction is Direction.FORWARD else (b, h.relation, a))

    for i, br in enumerate(path.branches):
        cur: Term = br.root
        for j, h in enumerate(br.hops):
            last = j == len(br.hops) - 1
            if h.terminal is not None:
                nxt: Term = h.terminal
            elif i == 0 and schema.answer_hop == j:
                nxt = ANSWER
            elif last:
                nxt = join_var
            else:
                nxt = Var(f"b{i}_{j}")
            add(cur, h, nxt)
            cur = nxt
    cur = join_var
    for j, h in enumerate(path.tail):
        nxt = ANSWER if j == len(path.tail) - 1 else Var(f"tail{j}")
        add(cur, h, nxt)
        cur = nxt
    return patterns, ANSWER


# JSON


def node_to_json(node: Node):
    return {"literal": node.label} if node.literal else node.label


def node_from_json(obj) -> Node:
    if isinstance(obj, dict):
        return Node.lit(obj["literal"])
    return Node.entity(obj)


def _hop_to_json(h: Hop) -> dict:
    d = {"rel": h.relation, "dir": h.direction.value}
    if h.terminal is not None:
        d["bound"] = node_to_json(h.terminal)
    return d


def _hop_from_json(d) -> Hop:
    term = node_from_json(d["bound"]) if "bound" in d else None
    return Hop(d["rel"], Direction(d["dir"]), term)


def path_to_json(path: QueryPath) -> dict:
    return {
        "schema": path.schema,
        "join": path.join.value,
        "branches": [{"root": node_to_json(b.root), "hops": [_hop_to_json(h) for h in b.hops]} for b in path.branches],
        "tail": [_hop_to_json(h) for h in path.tail],
    }


def path_from_json(obj: dict) -> QueryPath:
    path = QueryPath(
        obj["schema"],
        tuple(Branch(node_from_json(b["root"]), tuple(_hop_from_json(h) for h in b["hops"])) for b in obj["branches"]),
        Join(obj.get("join", SCHEMAS[obj["schema"]].join.value)),
        tuple(_hop_from_json(h) for h in obj.get("tail", ())),
    )
    validate(path)
    return path
