"""Questions file (JSONL) records.

One object per line::

    {"id": str, "question": str, "answers": [str], "gold_path": {...}?, "class": str?, "schema": str?}
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable

from .classifier import QuestionClass
from .schemas import QueryPath, path_from_json, path_to_json


@dataclass(frozen=True)
class QuestionRecord:
    id: str
    question: str
    answers: tuple[str, ...] = ()
    gold_path: QueryPath | None = None
    label: QuestionClass | None = None
    schema: str | None = None

    def to_json(self) -> dict:
        obj = {"id": self.id, "question": self.question, "answers": list(self.answers)}
        if self.gold_path is not None:
            obj["gold_path"] = path_to_json(self.gold_path)
        if self.label is not None:
            obj["class"] = self.label.value
        if self.schema is not None:
            obj["schema"] = self.schema
        return obj

    @classmethod
    def from_json(cls, obj: dict) -> "QuestionRecord":
        gp = obj.get("gold_path")
        label = obj.get("class")
        return cls(
            id=str(obj["id"]),
            question=obj["question"],
            answers=tuple(obj.get("answers", ())),
            gold_path=path_from_json(gp) if gp else None,
            label=QuestionClass(label) if label else None,
            schema=obj.get("schema") or (gp["schema"] if gp else None),
        )


# a generated sample is a question record with gold path, answers, class and schema set
SyntheticSample = QuestionRecord


def write_questions(records: Iterable[QuestionRecord], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(r.to_json(), ensure_ascii=False) + "\n")


def read_questions(path) -> list[QuestionRecord]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                out.append(QuestionRecord.from_json(json.loads(line)))
            except (ValueError, KeyError, TypeError) as exc:
                raise ValueError(f"{path}:{lineno}: bad question record: {exc}") from exc
    return out
