"""Evaluate a complete query path against the KB."""

from __future__ import annotations

from .kb import KnowledgeBase, Node, Triple
from .schemas import QueryPath, Var, path_patterns


def _resolve(term, binding):
    return binding.get(term, term) if isinstance(term, Var) else term


def _solve(kb: KnowledgeBase, patterns, binding):
    if not patterns:
        yield binding
        return

    def boundness(pat):
        s, _, o = pat
        return (not isinstance(_resolve(s, binding), Var)) + (not isinstance(_resolve(o, binding), Var))

    i = max(range(len(patterns)), key=lambda k: (boundness(patterns[k]), -k))
    s, p, o = patterns[i]
    rest = patterns[:i] + patterns[i + 1:]
    s, o = _resolve(s, binding), _resolve(o, binding)
    pid = kb.pred_id(p)
    if pid is None:
        return
    s_var, o_var = isinstance(s, Var), isinstance(o, Var)
    if not s_var and not o_var:
        if Triple(s, p, o) in kb:
            yield from _solve(kb, rest, binding)
    elif not s_var:
        sid = kb.node_id(s)
        if sid is None:
            return
        for q, oid in kb.out_edges(sid):
            if q == pid:
                yield from _solve(kb, rest, {**binding, o: kb.node(oid)})
    elif not o_var:
        oid = kb.node_id(o)
        if oid is None:
            return
        for q, sid in kb.in_edges(oid):
            if q == pid:
                yield from _solve(kb, rest, {**binding, s: kb.node(sid)})
    else:
        for t in kb.triples:
            if t.predicate != p or (s == o and t.subject != t.object):
                continue
            yield from _solve(kb, rest, {**binding, s: t.subject, o: t.object})


def execute_path(kb: KnowledgeBase, path: QueryPath) -> frozenset[Node]:
    """Bindings of the answer variable over all branch joins and bound terminals."""
    patterns, answer = path_patterns(path)
    return frozenset(b[answer] for b in _solve(kb, patterns, {}))
