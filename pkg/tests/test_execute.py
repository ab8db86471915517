import random

from kbqa.execute import execute_path
from kbqa.kb import Direction, KnowledgeBase, Node
from kbqa.schemas import SCHEMAS, Branch, Hop, QueryPath, Var, instantiate, path_patterns
from kbqa.search import brute_force_generate

from conftest import E, make_kb, random_triples

F, B = Direction.FORWARD, Direction.BACKWARD


def naive_join(kb, path):
    """Scan every triple for every pattern, keeping consistent variable bindings."""
    patterns, answer = path_patterns(path)
    triples = list(kb)
    out = set()

    def rec(i, binding):
        if i == len(patterns):
            out.add(binding[answer])
            return
        s, p, o = patterns[i]
        for t in triples:
            if t.predicate != p:
                continue
            b = dict(binding)
            ok = True
            for term, val in ((s, t.subject), (o, t.object)):
                if isinstance(term, Var):
                    if b.setdefault(term, val) != val:
                        ok = False
                elif term != val:
                    ok = False
            if ok:
                rec(i + 1, b)

    rec(0, {})
    return out


def test_chain_s2(chain_kb):
    path = instantiate(SCHEMAS["S2"], [E("A")], [[Hop("r1", F), Hop("r2", F)]])
    assert execute_path(chain_kb, path) == {E("C")}


def test_s4_intersection():
    kb = make_kb(("A", "r", "C"), ("A", "r", "D"), ("B", "s", "D"), ("B", "s", "E"))
    path = instantiate(SCHEMAS["S4"], [E("A"), E("B")], [[Hop("r", F)], [Hop("s", F)]])
    assert execute_path(kb, path) == {E("D")}


def test_bound_constraint():
    kb = make_kb(("M", "cast", "P"), ("M", "cast", "Q"), ("P", "born", '"1970"'), ("Q", "born", '"1980"'))
    path = instantiate(SCHEMAS["S3"], [E("M")], [[Hop("cast", F), Hop("born", F, Node.lit("1970"))]])
    assert execute_path(kb, path) == {E("P")}


def test_unknown_relation_empty(chain_kb):
    path = QueryPath("S1", (Branch(E("A"), (Hop("nope", F),)),))
    assert execute_path(chain_kb, path) == frozenset()


def random_path(rng, kb, schema):
    ents = kb.entities()
    rels = kb.predicates()
    roots = rng.sample(ents, schema.slots) if len(ents) >= schema.slots else None
    if roots is None:
        return None
    hops = []
    for i, n in enumerate(schema.hops):
        hs = [Hop(rng.choice(rels), rng.choice([F, B])) for _ in range(n)]
        if i == 0 and schema.bound:
            term = roots[1] if schema.bound == "entity" else rng.choice(ents)
            hs[-1] = Hop(hs[-1].relation, hs[-1].direction, term)
        hops.append(hs)
    tail = [Hop(rng.choice(rels), rng.choice([F, B])) for _ in range(schema.tail)]
    return instantiate(schema, roots, hops, tail)


def test_matches_naive_join_on_random_kbs():
    rng = random.Random(11)
    nonempty = 0
    for trial in range(6):
        kb = KnowledgeBase(random_triples(rng, 300, n_ent=40, n_rel=4, literal_rate=0.05))
        paths = []
        for _ in range(50):
            schema = SCHEMAS[rng.choice(list(SCHEMAS))]
            p = random_path(rng, kb, schema)
            if p is not None:
                paths.append(p)
        # paths known to match, so the comparison is not only over empty results
        for sid in ("S2", "S4", "S6", "S7"):
            s = SCHEMAS[sid]
            roots = rng.sample(kb.entities(), s.slots)
            paths += brute_force_generate(kb, "", s, roots)[:5]
        for p in paths:
            got = execute_path(kb, p)
            assert got == naive_join(kb, p)
            nonempty += bool(got)
    assert nonempty > 20
