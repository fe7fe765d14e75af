"""Loaders for the question bank, training records, qrels, and facet score files.

File formats (all UTF-8, hard error on invalid bytes; no quoting, tabs and
newlines are forbidden inside fields):

- question bank: header ``question_id<TAB>question``, one question per line.
- train records: header line, then 7 tab-separated columns per row:
  ``topic_id, initial_request, topic_desc, facet_id, question_id, question,
  answer`` (answer may be empty).
- qrels: whitespace-separated ``topic_id 0 id grade`` (classic 4-column
  judgment format).
- facet scores: 5-column TSV ``topic_id, facet_id, question_id, metric,
  value`` with metric one of MRR100 / NDCG3 / P5 and value in [0, 1].

All loaders are pure functions over file contents; the returned structures
are immutable after load and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

from clarion.errors import (
    DuplicateId,
    EmptyQuestionText,
    MalformedRow,
    MissingColumn,
    UnknownMetric,
    ValueOutOfRange,
)

QUESTION_BANK_HEADER = ("question_id", "question")
TRAIN_COLUMNS = (
    "topic_id",
    "initial_request",
    "topic_desc",
    "facet_id",
    "question_id",
    "question",
    "answer",
)
FACET_METRICS = ("MRR100", "NDCG3", "P5")


class QuestionBank:
    """Immutable id -> text map over all candidate clarifying questions.

    Iteration over ids is deterministic (lexicographic).
    """

    def __init__(self, entries: dict[str, str]):
        for qid, text in entries.items():
            if not text.strip():
                raise EmptyQuestionText(f"question {qid!r} has empty text")
        self._entries = {qid: entries[qid] for qid in sorted(entries)}

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[str]:
        return iter(self._entries)

    def __contains__(self, qid: object) -> bool:
        return qid in self._entries

    def __getitem__(self, qid: str) -> str:
        return self._entries[qid]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, QuestionBank) and self._entries == other._entries

    def ids(self) -> tuple[str, ...]:
        return tuple(self._entries)

    def items(self) -> Iterator[tuple[str, str]]:
        return iter(self._entries.items())

    def __repr__(self) -> str:
        return f"QuestionBank({len(self._entries)} questions)"


@dataclass(frozen=True)
class TrainRecord:
    """One (topic, facet, question, answer) row of single-turn supervision."""

    topic_id: str
    initial_request: str
    topic_desc: str
    facet_id: str
    question_id: str
    question_text: str
    answer_text: str

    def __post_init__(self):
        for name in ("topic_id", "facet_id", "question_id", "initial_request"):
            if not getattr(self, name):
                raise ValueError(f"TrainRecord.{name} must be non-empty")


@dataclass(frozen=True)
class Qrels:
    """Relevance judgments keyed by (topic_id, id)."""

    judgments: dict[tuple[str, str], int]

    def topics(self) -> tuple[str, ...]:
        return tuple(sorted({t for t, _ in self.judgments}))

    def topic_grades(self, topic_id: str) -> dict[str, int]:
        return {i: g for (t, i), g in self.judgments.items() if t == topic_id}


@dataclass(frozen=True)
class FacetScore:
    """Per-(topic, facet, question) metric values; absent metrics are None."""

    mrr100: float | None = None
    ndcg3: float | None = None
    p5: float | None = None


@dataclass(frozen=True)
class FacetScores:
    scores: dict[tuple[str, str, str], FacetScore] = field(default_factory=dict)

    def get(self, topic_id: str, facet_id: str, question_id: str) -> FacetScore | None:
        return self.scores.get((topic_id, facet_id, question_id))


def _read_lines(path: str) -> list[str]:
    # errors="strict": invalid byte sequences are a hard error, never replaced.
    with open(path, "r", encoding="utf-8", errors="strict", newline="") as f:
        return f.read().splitlines()


def load_question_bank(path: str) -> QuestionBank:
    """Load a question bank TSV; duplicate ids and empty texts are errors."""
    lines = _read_lines(path)
    if not lines:
        raise MissingColumn("empty file, expected header 'question_id\\tquestion'", path=path, line_no=1)
    header = tuple(lines[0].split("\t"))
    if header != QUESTION_BANK_HEADER:
        raise MissingColumn(
            f"expected header {QUESTION_BANK_HEADER}, got {header}", path=path, line_no=1
        )
    entries: dict[str, str] = {}
    for line_no, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        cols = line.split("\t")
        if len(cols) != 2:
            raise MalformedRow(f"expected 2 columns, got {len(cols)}", path=path, line_no=line_no)
        qid, text = cols
        if not qid:
            raise MalformedRow("empty question_id", path=path, line_no=line_no)
        if qid in entries:
            raise DuplicateId(f"duplicate question_id {qid!r}", path=path, line_no=line_no)
        if not text.strip():
            raise EmptyQuestionText(f"question {qid!r} has empty text", path=path, line_no=line_no)
        entries[qid] = text
    return QuestionBank(entries)


def save_question_bank(bank: QuestionBank, path: str) -> None:
    """Write a bank back to TSV; reloading yields an identical map."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write("question_id\tquestion\n")
        for qid, text in bank.items():
            f.write(f"{qid}\t{text}\n")


def load_train_records(path: str) -> list[TrainRecord]:
    """Load single-turn training rows, preserving row order and count exactly."""
    lines = _read_lines(path)
    if not lines:
        raise MissingColumn(
            "empty file, expected 7-column header " + "\\t".join(TRAIN_COLUMNS), path=path, line_no=1
        )
    header = tuple(lines[0].split("\t"))
    if len(header) != len(TRAIN_COLUMNS):
        raise MissingColumn(
            f"expected {len(TRAIN_COLUMNS)} header columns, got {len(header)}",
            path=path,
            line_no=1,
        )
    records: list[TrainRecord] = []
    for line_no, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        cols = line.split("\t")
        if len(cols) != 7:
            raise MalformedRow(f"expected 7 columns, got {len(cols)}", path=path, line_no=line_no)
        topic_id, initial_request, topic_desc, facet_id, question_id, question, answer = cols
        if not (topic_id and facet_id and question_id and initial_request):
            raise MalformedRow(
                "topic_id, initial_request, facet_id and question_id must be non-empty",
                path=path,
                line_no=line_no,
            )
        records.append(
            TrainRecord(
                topic_id=topic_id,
                initial_request=initial_request,
                topic_desc=topic_desc,
                facet_id=facet_id,
                question_id=question_id,
                question_text=question,
                answer_text=answer,
            )
        )
    return records


def load_qrels(path: str) -> Qrels:
    """Load classic 4-column judgments: ``topic_id 0 id grade``."""
    judgments: dict[tuple[str, str], int] = {}
    for line_no, line in enumerate(_read_lines(path), start=1):
        if not line.strip():
            continue
        cols = line.split()
        if len(cols) != 4:
            raise MalformedRow(f"expected 4 columns, got {len(cols)}", path=path, line_no=line_no)
        topic_id, _unused, doc_id, grade_str = cols
        try:
            grade = int(grade_str)
        except ValueError:
            raise MalformedRow(f"grade {grade_str!r} is not an integer", path=path, line_no=line_no)
        if grade < 0:
            raise ValueOutOfRange(f"grade {grade} is negative", path=path, line_no=line_no)
        key = (topic_id, doc_id)
        if key in judgments:
            raise DuplicateId(f"duplicate judgment for {key}", path=path, line_no=line_no)
        judgments[key] = grade
    return Qrels(judgments)


def load_facet_scores(path: str) -> FacetScores:
    """Load the 5-column facet score TSV into a (topic, facet, question) map."""
    scores: dict[tuple[str, str, str], dict[str, float]] = {}
    for line_no, line in enumerate(_read_lines(path), start=1):
        if not line:
            continue
        cols = line.split("\t")
        if len(cols) != 5:
            raise MalformedRow(f"expected 5 columns, got {len(cols)}", path=path, line_no=line_no)
        topic_id, facet_id, question_id, metric, value_str = cols
        if metric not in FACET_METRICS:
            raise UnknownMetric(f"unknown metric {metric!r}", path=path, line_no=line_no)
        try:
            value = float(value_str)
        except ValueError:
            raise MalformedRow(f"value {value_str!r} is not a number", path=path, line_no=line_no)
        if not 0.0 <= value <= 1.0:
            raise ValueOutOfRange(f"value {value} outside [0, 1]", path=path, line_no=line_no)
        scores.setdefault((topic_id, facet_id, question_id), {})[metric] = value
    return FacetScores(
        {
            key: FacetScore(
                mrr100=vals.get("MRR100"),
                ndcg3=vals.get("NDCG3"),
                p5=vals.get("P5"),
            )
            for key, vals in scores.items()
        }
    )
