"""Candidate recall: top BM25 hits plus the shortest never-asked questions.

Each request gets up to ``n_bm25 + n_short`` unique candidates: the top BM25
hits (after exclusions), then entries from the never-asked pool, shortest
first, until ``n_short`` distinct pool candidates are added or the pool is
exhausted.  A question recalled by both sources is kept with source "bm25".
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

from clarion.bm25 import Bm25Index, search, tokenize
from clarion.corpus_io import QuestionBank, TrainRecord

BM25 = "bm25"
SHORT_POOL = "short_pool"


@dataclass(frozen=True)
class Candidate:
    question_id: str
    source: str  # "bm25" | "short_pool"
    # BM25 score, or negative term count for short_pool (larger = shorter).
    recall_score: float


class QnaPool:
    """Never-asked question ids, ascending by term count, ties by id."""

    def __init__(self, ordered: list[tuple[str, int]]):
        self._ids = tuple(qid for qid, _ in ordered)
        self._counts = {qid: n for qid, n in ordered}

    def __len__(self) -> int:
        return len(self._ids)

    def __iter__(self) -> Iterator[str]:
        return iter(self._ids)

    def __getitem__(self, i: int) -> str:
        return self._ids[i]

    def token_count(self, qid: str) -> int:
        return self._counts[qid]


def shortest_unseen_pool(bank: QuestionBank, records: Sequence[TrainRecord]) -> QnaPool:
    """Bank questions whose id never occurs in the records, shortest first."""
    asked = {r.question_id for r in records}
    entries = [
        (qid, len(tokenize(text))) for qid, text in bank.items() if qid not in asked
    ]
    entries.sort(key=lambda e: (e[1], e[0]))
    return QnaPool(entries)


def recall_candidates(
    index: Bm25Index,
    pool: QnaPool,
    request_text: str,
    n_bm25: int = 100,
    n_short: int = 100,
    exclude: frozenset[str] | set[str] = frozenset(),
) -> list[Candidate]:
    """Recall up to ``n_bm25 + n_short`` unique candidates for one request.

    BM25 shortfall (fewer positive-score hits than ``n_bm25``) is not
    backfilled from the pool beyond ``n_short``.
    """
    if n_bm25 < 0 or n_short < 0:
        raise ValueError("candidate counts must be >= 0")
    candidates: list[Candidate] = []
    taken: set[str] = set()
    if n_bm25 > 0:
        for qid, score in search(index, request_text, k=index.n_docs):
            if qid in exclude:
                continue
            candidates.append(Candidate(qid, BM25, score))
            taken.add(qid)
            if len(taken) >= n_bm25:
                break
    if n_short > 0:
        added = 0
        for qid in pool:
            if qid in exclude or qid in taken:
                continue
            candidates.append(Candidate(qid, SHORT_POOL, -float(pool.token_count(qid))))
            taken.add(qid)
            added += 1
            if added >= n_short:
                break
    return candidates
