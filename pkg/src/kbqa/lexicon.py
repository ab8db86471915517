"""Mention dictionary, forward-maximum-matching tokenizer and mention lookup."""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

from .kb import KnowledgeBase


class LexiconFormatError(ValueError):
    pass


def _normalize(s: str) -> str:
    return unicodedata.normalize("NFKC", s).casefold()


class MentionLexicon:
    """Multimap from mention strings to entity labels.

    With ``normalize=True`` keys and lookups are NFKC-folded and casefolded;
    folding can change string length, so tokenization then works on
    per-character folding to keep offsets aligned with the original text.
    """

    def __init__(self, pairs: Iterable[tuple[str, str]] = (), normalize: bool = False):
        self.normalize = normalize
        entries: dict[str, set[str]] = {}
        for mention, entity in pairs:
            if not mention or not entity:
                raise ValueError(f"empty mention or entity: {(mention, entity)!r}")
            entries.setdefault(self._key(mention), set()).add(entity)
        self._entries = {m: tuple(sorted(es)) for m, es in entries.items()}
        self.max_len = max((len(m) for m in self._entries), default=0)
        by_entity: dict[str, list[str]] = {}
        for m, es in self._entries.items():
            for e in es:
                by_entity.setdefault(e, []).append(m)
        self._mentions_of = {e: sorted(ms, key=lambda m: (len(m), m)) for e, ms in by_entity.items()}

    def _key(self, s: str) -> str:
        return _normalize(s) if self.normalize else s

    def __len__(self):
        return sum(len(es) for es in self._entries.values())

    def __contains__(self, mention: str) -> bool:
        return self._key(mention) in self._entries

    def lookup(self, mention: str) -> tuple[str, ...]:
        return self._entries.get(self._key(mention), ())

    def mentions(self) -> list[str]:
        return sorted(self._entries)

    def pairs(self) -> list[tuple[str, str]]:
        return [(m, e) for m in sorted(self._entries) for e in self._entries[m]]

    def shortest_mention(self, entity: str) -> str | None:
        ms = self._mentions_of.get(entity)
        return ms[0] if ms else None

    def merged(self, other: "MentionLexicon") -> "MentionLexicon":
        return MentionLexicon(self.pairs() + other.pairs(), normalize=self.normalize)


def load_lexicon(path, normalize: bool = False) -> MentionLexicon:
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 2 or not fields[0] or not fields[1]:
                raise LexiconFormatError(f"line {lineno}: expected 'mention<TAB>entity'")
            pairs.append((fields[0], fields[1]))
    return MentionLexicon(pairs, normalize=normalize)


def lexicon_from_kb(kb: KnowledgeBase, normalize: bool = False) -> MentionLexicon:
    """Every KB subject as a mention of itself. Predicates are not included."""
    return MentionLexicon(((s.label, s.label) for s in kb.subjects()), normalize=normalize)


class Token(NamedTuple):
    text: str
    start: int
    end: int


@dataclass(frozen=True)
class TokenizedQuestion:
    text: str
    tokens: tuple[Token, ...] = field(default=())

    @property
    def words(self) -> list[str]:
        return [t.text for t in self.tokens]


class Mention(NamedTuple):
    text: str
    start: int
    end: int
    entities: tuple[str, ...]


def _candidate(text: str, start: int, end: int, lex: MentionLexicon) -> str:
    sub = text[start:end]
    if lex.normalize:
        return "".join(_normalize(c) for c in sub)
    return sub


def tokenize(text: str, lex: MentionLexicon) -> TokenizedQuestion:
    """Forward maximum matching; characters not covered by a mention become single tokens."""
    tokens = []
    i, n = 0, len(text)
    while i < n:
        end = i + 1
        for j in range(min(n, i + lex.max_len), i + 1, -1):
            if _candidate(text, i, j, lex) in lex._entries:
                end = j
                break
        tokens.append(Token(text[i:end], i, end))
        i = end
    return TokenizedQuestion(text, tuple(tokens))


def find_mentions(tq: TokenizedQuestion, lex: MentionLexicon) -> list[Mention]:
    """All substrings of the question that are lexicon mentions, nested ones included.

    Sorted by start offset, then longer spans first.
    """
    text = tq.text
    found = []
    for i in range(len(text)):
        for j in range(min(len(text), i + lex.max_len), i, -1):
            ents = lex._entries.get(_candidate(text, i, j, lex))
            if ents:
                found.append(Mention(text[i:j], i, j, ents))
    return found
