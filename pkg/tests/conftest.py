import random

import pytest

from kbqa.kb import KnowledgeBase, Node, Triple
from kbqa.lexicon import MentionLexicon

E = Node.entity


def triples(*rows):
    out = []
    for s, p, o in rows:
        obj = Node.lit(o[1:-1]) if o.startswith('"') else E(o)
        out.append(Triple(E(s), p, obj))
    return out


def make_kb(*rows) -> KnowledgeBase:
    return KnowledgeBase(triples(*rows))


def random_triples(rng: random.Random, n, n_ent=12, n_rel=4, literal_rate=0.0):
    out = []
    for _ in range(n):
        s = E(f"e{rng.randrange(n_ent)}")
        o = Node.lit(f"v{rng.randrange(n_ent)}") if rng.random() < literal_rate else E(f"e{rng.randrange(n_ent)}")
        out.append(Triple(s, f"r{rng.randrange(n_rel)}", o))
    return out


@pytest.fixture
def movie_kb():
    return make_kb(
        ("Avatar_dir", "director_of", "Avatar"),
        ("Suzy", "wife_of", "Avatar_dir"),
        ("Worthington", "actor_of", "Avatar"),
        ("Worthington", "born_in", "British"),
        ("Avatar", "release_year", '"2009"'),
    )


@pytest.fixture
def movie_lex():
    return MentionLexicon([("Avatar", "Avatar"), ("Avator", "Avatar"), ("British", "British"), ("Suzy", "Suzy")])


@pytest.fixture
def chain_kb():
    return make_kb(("A", "r1", "B"), ("B", "r2", "C"))


# one line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
