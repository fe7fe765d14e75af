"""Construction of the point-wise ranking dataset and the understanding dataset.

Positives are the (initial_request, question) pairs actually asked in the
records, with document-relevance targets looked up from the facet score file
(missing values fall back to 0 with a warning).  Negatives are built per
distinct (topic, initial_request): the top BM25 hits for the request plus a
seeded uniform sample of bank questions, minus anything asked for that
topic, deduplicated.  Random negatives are drawn without replacement and
never collide with the BM25 negatives, so reruns with the same seed are
byte-identical and a different seed changes only the random rows.

Generation is single-threaded: seeded determinism takes precedence over
parallel speed.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass
from typing import Sequence

from clarion.bm25 import Bm25Index, search
from clarion.corpus_io import FacetScores, QuestionBank, TrainRecord
from clarion.errors import EmptyInput

log = logging.getLogger(__name__)

POSITIVE = "positive"
NEG_BM25 = "neg_bm25"
NEG_RANDOM = "neg_random"

NEED_CLARIFY = "need_clarify"
NO_NEED_CLARIFY = "no_need_clarify"

RANKING_COLUMNS = ("context", "question", "label", "mrr100", "ndcg3", "provenance")
UNDERSTANDING_COLUMNS = ("question", "answer", "label")


@dataclass(frozen=True)
class RankingExample:
    context_text: str
    question_text: str
    label: int  # 0 or 1
    mrr100: float
    ndcg3: float
    provenance: str  # "positive" | "neg_bm25" | "neg_random"

    def __post_init__(self):
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label}")
        if self.label == 0 and (self.mrr100 != 0.0 or self.ndcg3 != 0.0):
            raise ValueError("negative examples must carry zero targets")
        if self.label == 1 and self.provenance != POSITIVE:
            raise ValueError("label 1 requires provenance 'positive'")


@dataclass(frozen=True)
class UnderstandingExample:
    question_text: str
    answer_text: str
    label: str  # "need_clarify" | "no_need_clarify"


def _topic_rng(seed: int, topic_id: str) -> random.Random:
    # Split the seed per topic so dropping one topic never shifts the draws
    # made for any other.
    return random.Random(f"{seed}/{topic_id}")


def build_ranking_dataset(
    records: Sequence[TrainRecord],
    bank: QuestionBank,
    index: Bm25Index,
    facet_scores: FacetScores,
    seed: int,
    n_bm25: int = 200,
    n_random: int = 300,
) -> list[RankingExample]:
    """Build positives from every record plus per-topic sampled negatives."""
    if not records or len(bank) == 0:
        raise EmptyInput("ranking dataset needs non-empty records and bank")

    examples: list[RankingExample] = []
    missing_targets = 0
    for r in records:
        entry = facet_scores.get(r.topic_id, r.facet_id, r.question_id)
        mrr = entry.mrr100 if entry and entry.mrr100 is not None else 0.0
        ndcg = entry.ndcg3 if entry and entry.ndcg3 is not None else 0.0
        if entry is None or entry.mrr100 is None or entry.ndcg3 is None:
            missing_targets += 1
        examples.append(
            RankingExample(
                context_text=r.initial_request,
                question_text=r.question_text,
                label=1,
                mrr100=mrr,
                ndcg3=ndcg,
                provenance=POSITIVE,
            )
        )
    if missing_targets:
        log.warning(
            "%d positive pairs had no facet score entry; targets default to 0",
            missing_targets,
        )

    asked_by_topic: dict[str, set[str]] = {}
    groups: list[tuple[str, str]] = []  # (topic_id, initial_request), first-appearance order
    for r in records:
        if r.topic_id not in asked_by_topic:
            asked_by_topic[r.topic_id] = set()
            groups.append((r.topic_id, r.initial_request))
        asked_by_topic[r.topic_id].add(r.question_id)

    all_ids = bank.ids()
    for topic_id, request in groups:
        asked = asked_by_topic[topic_id]
        bm25_ids = []
        if n_bm25 > 0:
            for qid, _score in search(index, request, k=n_bm25):
                if qid not in asked:
                    bm25_ids.append(qid)
        taken = asked | set(bm25_ids)
        pool = [qid for qid in all_ids if qid not in taken]
        rng = _topic_rng(seed, topic_id)
        random_ids = rng.sample(pool, min(n_random, len(pool)))
        for qid in bm25_ids:
            examples.append(
                RankingExample(request, bank[qid], 0, 0.0, 0.0, NEG_BM25)
            )
        for qid in random_ids:
            examples.append(
                RankingExample(request, bank[qid], 0, 0.0, 0.0, NEG_RANDOM)
            )
    return examples


def build_dev_dataset(
    records: Sequence[TrainRecord],
    bank: QuestionBank,
    index: Bm25Index,
    facet_scores: FacetScores,
    seed: int,
    n_bm25: int = 200,
    n_random: int = 300,
) -> list[RankingExample]:
    """Identical procedure applied to the dev split's records."""
    return build_ranking_dataset(
        records, bank, index, facet_scores, seed, n_bm25=n_bm25, n_random=n_random
    )


def build_understanding_dataset(
    records: Sequence[TrainRecord], facet_scores: FacetScores
) -> list[UnderstandingExample]:
    """One example per record with a P@5 entry; p5 == 0 means clarification needed."""
    examples: list[UnderstandingExample] = []
    skipped = 0
    for r in records:
        entry = facet_scores.get(r.topic_id, r.facet_id, r.question_id)
        if entry is None or entry.p5 is None:
            skipped += 1
            continue
        label = NEED_CLARIFY if entry.p5 == 0.0 else NO_NEED_CLARIFY
        examples.append(
            UnderstandingExample(
                question_text=r.question_text,
                answer_text=r.answer_text,
                label=label,
            )
        )
    if skipped:
        log.warning("%d records lacked a P5 score and were skipped", skipped)
    return examples


def write_ranking_dataset(examples: Sequence[RankingExample], path: str, seed: int) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(f"# seed={seed}\n")
        f.write("\t".join(RANKING_COLUMNS) + "\n")
        for ex in examples:
            f.write(
                f"{ex.context_text}\t{ex.question_text}\t{ex.label}\t"
                f"{ex.mrr100!r}\t{ex.ndcg3!r}\t{ex.provenance}\n"
            )


def read_ranking_dataset(path: str) -> tuple[int | None, list[RankingExample]]:
    """Read back a written ranking TSV; returns (seed, examples)."""
    seed: int | None = None
    examples: list[RankingExample] = []
    with open(path, "r", encoding="utf-8", newline="") as f:
        for line in f.read().splitlines():
            if line.startswith("# seed="):
                seed = int(line.removeprefix("# seed="))
                continue
            if not line or line == "\t".join(RANKING_COLUMNS):
                continue
            context, question, label, mrr, ndcg, provenance = line.split("\t")
            examples.append(
                RankingExample(context, question, int(label), float(mrr), float(ndcg), provenance)
            )
    return seed, examples


def write_understanding_dataset(examples: Sequence[UnderstandingExample], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write("\t".join(UNDERSTANDING_COLUMNS) + "\n")
        for ex in examples:
            f.write(f"{ex.question_text}\t{ex.answer_text}\t{ex.label}\n")
