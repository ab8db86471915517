"""In-memory triple store with forward/backward indexes and path statistics."""

from __future__ import annotations

import enum
import logging
from typing import Iterable, Iterator, NamedTuple, Sequence

log = logging.getLogger(__name__)


class KBFormatError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class Direction(enum.Enum):
    FORWARD = "fwd"
    BACKWARD = "bwd"

    @property
    def opposite(self) -> "Direction":
        return Direction.BACKWARD if self is Direction.FORWARD else Direction.FORWARD


class Node(NamedTuple):
    label: str
    literal: bool = False

    @classmethod
    def entity(cls, label: str) -> "Node":
        return cls(label, False)

    @classmethod
    def lit(cls, label: str) -> "Node":
        return cls(label, True)

    def sort_key(self):
        return (self.label, self.literal)

    def __str__(self):
        return f'"{self.label}"' if self.literal else self.label


class Triple(NamedTuple):
    subject: Node
    predicate: str
    object: Node


def _as_node(e) -> Node:
    return e if isinstance(e, Node) else Node.entity(e)


class KnowledgeBase:
    """Immutable triple store.

    Labels are interned to integer ids; the id-level accessors (``out_edges``,
    ``in_edges``, ``steps``) are what the search code runs on. Adjacency lists
    are ordered by predicate label, then neighbour label.
    """

    def __init__(self, triples: Iterable[Triple] = ()):
        seen: dict[Triple, None] = {}
        for t in triples:
            if t.subject.literal:
                raise ValueError(f"literal in subject position: {t}")
            if not t.subject.label or not t.predicate:
                raise ValueError(f"empty label in {t}")
            if not t.object.literal and not t.object.label:
                raise ValueError(f"empty entity label in {t}")
            seen.setdefault(t, None)
        self._triples: tuple[Triple, ...] = tuple(seen)
        self._tset = frozenset(self._triples)

        self._nodes: list[Node] = []
        self._node_ids: dict[Node, int] = {}
        self._preds: list[str] = []
        self._pred_ids: dict[str, int] = {}
        fwd: dict[int, list[tuple[int, int]]] = {}
        bwd: dict[int, list[tuple[int, int]]] = {}
        for s, p, o in self._triples:
            sid, pid, oid = self._intern(s), self._intern_pred(p), self._intern(o)
            fwd.setdefault(sid, []).append((pid, oid))
            bwd.setdefault(oid, []).append((pid, sid))

        def key(edge):
            pid, nid = edge
            return (self._preds[pid], self._nodes[nid].sort_key())

        self._fwd = {k: tuple(sorted(v, key=key)) for k, v in fwd.items()}
        self._bwd = {k: tuple(sorted(v, key=key)) for k, v in bwd.items()}
        self._path_count_cache: dict[tuple, int] = {}

    def _intern(self, node: Node) -> int:
        nid = self._node_ids.get(node)
        if nid is None:
            nid = self._node_ids[node] = len(self._nodes)
            self._nodes.append(node)
        return nid

    def _intern_pred(self, p: str) -> int:
        pid = self._pred_ids.get(p)
        if pid is None:
            pid = self._pred_ids[p] = len(self._preds)
            self._preds.append(p)
        return pid

    # label level

    @property
    def triples(self) -> tuple[Triple, ...]:
        return self._triples

    def __len__(self):
        return len(self._triples)

    def __iter__(self) -> Iterator[Triple]:
        return iter(self._triples)

    def __contains__(self, t) -> bool:
        return t in self._tset

    def __eq__(self, other):
        return isinstance(other, KnowledgeBase) and self._triples == other._triples

    def __hash__(self):
        return hash(self._triples)

    def entities(self) -> list[Node]:
        """All entity nodes, sorted by label."""
        return sorted((n for n in self._nodes if not n.literal), key=Node.sort_key)

    def subjects(self) -> list[Node]:
        return sorted({t.subject for t in self._triples}, key=Node.sort_key)

    def predicates(self) -> list[str]:
        return sorted(self._preds)

    def neighbors(self, e, direction: Direction) -> list[tuple[str, Node]]:
        nid = self.node_id(_as_node(e))
        if nid is None:
            return []
        edges = self.out_edges(nid) if direction is Direction.FORWARD else self.in_edges(nid)
        return [(self._preds[p], self._nodes[n]) for p, n in edges]

    # id level

    def node_id(self, node: Node) -> int | None:
        return self._node_ids.get(node)

    def node(self, nid: int) -> Node:
        return self._nodes[nid]

    def pred_id(self, p: str) -> int | None:
        return self._pred_ids.get(p)

    def pred(self, pid: int) -> str:
        return self._preds[pid]

    def out_edges(self, nid: int) -> tuple[tuple[int, int], ...]:
        return self._fwd.get(nid, ())

    def in_edges(self, nid: int) -> tuple[tuple[int, int], ...]:
        return self._bwd.get(nid, ())

    def steps(self, nid: int):
        """Yield ``(pid, direction, next_id, triple_key)`` for every edge at ``nid``.

        ``triple_key`` is the ``(s, p, o)`` id triple, so a caller can refuse to
        walk back along the edge it just arrived by.
        """
        for pid, oid in self._fwd.get(nid, ()):
            yield pid, Direction.FORWARD, oid, (nid, pid, oid)
        for pid, sid in self._bwd.get(nid, ()):
            yield pid, Direction.BACKWARD, sid, (sid, pid, nid)

    def degree(self, nid: int) -> int:
        return len(self._fwd.get(nid, ())) + len(self._bwd.get(nid, ()))

    def max_degree(self) -> int:
        return max((self.degree(i) for i in range(len(self._nodes))), default=0)

    def count_paths(self, nid: int, hops: int) -> int:
        """Number of relation paths of length 1..hops starting at ``nid``.

        Linear in edges x hops: paths leaving ``m`` after arriving by step ``s``
        are all paths from ``m`` minus those that start by reversing ``s``.
        """
        return self._from_node(nid, hops)

    def _from_node(self, nid, k) -> int:
        if k == 0:
            return 0
        key = (nid, k)
        cached = self._path_count_cache.get(key)
        if cached is None:
            cached = sum(1 + self._after_step(tkey, d, nxt, nid, k - 1) for _, d, nxt, tkey in self.steps(nid))
            self._path_count_cache[key] = cached
        return cached

    def _after_step(self, tkey, d, here, prev, k) -> int:
        if k == 0:
            return 0
        key = (tkey, d, k)
        cached = self._path_count_cache.get(key)
        if cached is None:
            cached = self._from_node(here, k) - 1 - self._after_step(tkey, d.opposite, prev, here, k - 1)
            self._path_count_cache[key] = cached
        return cached


def parse_kb_lines(lines: Iterable[str]) -> Iterator[Triple]:
    for lineno, raw in enumerate(lines, 1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise KBFormatError(lineno, f"expected 3 tab-separated fields, got {len(fields)}")
        s, p, o = fields
        if not s or not p or not o:
            raise KBFormatError(lineno, "empty field")
        if s.startswith('"'):
            raise KBFormatError(lineno, "literal in subject position")
        if len(o) >= 2 and o.startswith('"') and o.endswith('"'):
            obj = Node.lit(o[1:-1])
        else:
            obj = Node.entity(o)
        yield Triple(Node.entity(s), p, obj)


def load_kb(path) -> KnowledgeBase:
    with open(path, encoding="utf-8") as fh:
        kb = KnowledgeBase(parse_kb_lines(fh))
    log.info("loaded %d triples from %s", len(kb), path)
    return kb


def dump_kb(kb: KnowledgeBase, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for s, p, o in kb.triples:
            fh.write(f"{s.label}\t{p}\t{o}\n")


def two_hop_path_count(kb: KnowledgeBase, e) -> int:
    """Distinct relation paths of length 1 or 2 from ``e``, either direction per step.

    A step may not go straight back along the edge it just used.
    """
    nid = kb.node_id(_as_node(e))
    return 0 if nid is None else kb.count_paths(nid, 2)


def avg_relation_count(kb: KnowledgeBase, entities: Sequence, hops: int) -> float:
    if hops not in (1, 2, 3):
        raise ValueError(f"hops must be 1, 2 or 3, got {hops}")
    if not entities:
        raise ValueError("empty entity list")
    total = 0
    for e in entities:
        nid = kb.node_id(_as_node(e))
        total += 0 if nid is None else kb.count_paths(nid, hops)
    return total / len(entities)
