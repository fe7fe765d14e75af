"""IR metrics (MRR, P@k, nDCG@k, Recall@k) and the run-vs-qrels harness.

Conventions, fixed for the whole package:

- Macro (per-topic) averaging over the topics present in the qrels.
- A topic missing from the run contributes 0 (for recall, only topics with
  at least one relevant id enter the average; zero-relevant topics are
  skipped for recall and scored 0 for the other metrics).
- nDCG uses raw-grade gain with a log2(rank + 1) discount; nDCG is 0 when
  the ideal DCG is 0.
- Precision divides by k even when the run is shorter than k.

Run files are the classic 6-column format ``topic Q0 id rank score name``;
entries are ordered by descending score with ties broken by ascending id
(the file's rank column is ignored).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from clarion.corpus_io import Qrels, load_qrels
from clarion.errors import DuplicateId, MalformedRow, UnknownMetric

METRIC_NAMES = ("mrr", "p", "ndcg", "recall")


@dataclass(frozen=True)
class RunFile:
    """Per-topic ranked (id, score) lists, descending score."""

    topics: dict[str, list[tuple[str, float]]]
    run_name: str = "run"

    def ranking(self, topic_id: str) -> list[str]:
        return [i for i, _ in self.topics.get(topic_id, [])]


def _sort_entries(entries: list[tuple[str, float]]) -> list[tuple[str, float]]:
    return sorted(entries, key=lambda e: (-e[1], e[0]))


def make_run(topics: dict[str, list[tuple[str, float]]], run_name: str = "run") -> RunFile:
    """Build a RunFile from unsorted per-topic (id, score) lists."""
    out: dict[str, list[tuple[str, float]]] = {}
    for topic_id, entries in topics.items():
        ids = [i for i, _ in entries]
        if len(ids) != len(set(ids)):
            raise DuplicateId(f"duplicate ids in run for topic {topic_id!r}")
        out[topic_id] = _sort_entries(entries)
    return RunFile(out, run_name)


def load_run(path: str) -> RunFile:
    """Load a classic 6-column run file."""
    topics: dict[str, list[tuple[str, float]]] = {}
    run_name = "run"
    seen: set[tuple[str, str]] = set()
    with open(path, "r", encoding="utf-8", newline="") as f:
        for line_no, line in enumerate(f.read().splitlines(), start=1):
            if not line.strip():
                continue
            cols = line.split()
            if len(cols) != 6:
                raise MalformedRow(
                    f"expected 6 columns 'topic Q0 id rank score name', got {len(cols)}",
                    path=path,
                    line_no=line_no,
                )
            topic_id, _q0, doc_id, _rank, score_str, run_name = cols
            try:
                score = float(score_str)
            except ValueError:
                raise MalformedRow(f"score {score_str!r} is not a number", path=path, line_no=line_no)
            if (topic_id, doc_id) in seen:
                raise DuplicateId(f"duplicate id {doc_id!r} for topic {topic_id!r}", path=path, line_no=line_no)
            seen.add((topic_id, doc_id))
            topics.setdefault(topic_id, []).append((doc_id, score))
    return RunFile({t: _sort_entries(es) for t, es in topics.items()}, run_name)


def save_run(run: RunFile, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        for topic_id in sorted(run.topics):
            for rank, (doc_id, score) in enumerate(run.topics[topic_id], start=1):
                f.write(f"{topic_id} Q0 {doc_id} {rank} {score!r} {run.run_name}\n")


def _relevant(qrels: Qrels, topic_id: str) -> dict[str, int]:
    return {i: g for i, g in qrels.topic_grades(topic_id).items() if g > 0}


def _mrr_topic(ranking: list[str], relevant: dict[str, int], cutoff: int | None) -> float:
    top = ranking if cutoff is None else ranking[:cutoff]
    for rank, doc_id in enumerate(top, start=1):
        if doc_id in relevant:
            return 1.0 / rank
    return 0.0


def _precision_topic(ranking: list[str], relevant: dict[str, int], k: int) -> float:
    hits = sum(1 for doc_id in ranking[:k] if doc_id in relevant)
    return hits / k


def _ndcg_topic(ranking: list[str], relevant: dict[str, int], k: int) -> float:
    dcg = 0.0
    for rank, doc_id in enumerate(ranking[:k], start=1):
        grade = relevant.get(doc_id, 0)
        if grade:
            dcg += grade / math.log2(rank + 1)
    ideal = sorted(relevant.values(), reverse=True)[:k]
    idcg = sum(g / math.log2(rank + 1) for rank, g in enumerate(ideal, start=1))
    return dcg / idcg if idcg > 0 else 0.0


def _recall_topic(ranking: list[str], relevant: dict[str, int], k: int) -> float:
    hits = sum(1 for doc_id in ranking[:k] if doc_id in relevant)
    return hits / len(relevant)


def _macro(values: dict[str, float]) -> float:
    return sum(values.values()) / len(values) if values else 0.0


def per_topic(metric: str, run: RunFile, qrels: Qrels, k: int | None) -> dict[str, float]:
    """Per-topic values for one metric over the qrels topics."""
    values: dict[str, float] = {}
    for topic_id in qrels.topics():
        relevant = _relevant(qrels, topic_id)
        if metric == "recall" and not relevant:
            continue  # undefined denominator; excluded from the average
        ranking = run.ranking(topic_id)
        if metric == "mrr":
            values[topic_id] = _mrr_topic(ranking, relevant, k)
        elif metric == "p":
            values[topic_id] = _precision_topic(ranking, relevant, k)
        elif metric == "ndcg":
            values[topic_id] = _ndcg_topic(ranking, relevant, k)
        elif metric == "recall":
            values[topic_id] = _recall_topic(ranking, relevant, k)
        else:
            raise UnknownMetric(f"unknown metric {metric!r}")
    return values


def mrr(run: RunFile, qrels: Qrels, cutoff: int | None = None) -> float:
    """Mean reciprocal rank of the first relevant id within the cutoff."""
    if cutoff is not None and cutoff < 1:
        raise ValueError(f"cutoff must be >= 1, got {cutoff}")
    return _macro(per_topic("mrr", run, qrels, cutoff))


def precision_at_k(run: RunFile, qrels: Qrels, k: int) -> float:
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return _macro(per_topic("p", run, qrels, k))


def ndcg_at_k(run: RunFile, qrels: Qrels, k: int) -> float:
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return _macro(per_topic("ndcg", run, qrels, k))


def recall_at_k(run: RunFile, qrels: Qrels, k: int) -> float:
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return _macro(per_topic("recall", run, qrels, k))


@dataclass(frozen=True)
class MetricSpec:
    """A parsed metric request such as ``mrr@100``, ``p@3``, or ``mrr``."""

    name: str
    k: int | None

    @classmethod
    def parse(cls, spec: str) -> "MetricSpec":
        raw = spec.strip().lower()
        name, _, k_str = raw.partition("@")
        if name == "precision":
            name = "p"
        if name not in METRIC_NAMES:
            raise UnknownMetric(f"unknown metric {spec!r}")
        if not k_str:
            if name == "mrr":
                return cls("mrr", None)
            raise UnknownMetric(f"{name} requires a cutoff, e.g. {name}@5")
        try:
            k = int(k_str)
        except ValueError:
            raise UnknownMetric(f"bad cutoff in {spec!r}")
        if k < 1:
            raise UnknownMetric(f"cutoff must be >= 1 in {spec!r}")
        return cls(name, k)

    def label(self) -> str:
        return self.name if self.k is None else f"{self.name}@{self.k}"


@dataclass(frozen=True)
class MetricReport:
    """Per-metric per-topic values plus macro-averages."""

    per_metric: dict[str, dict[str, float]] = field(default_factory=dict)
    averages: dict[str, float] = field(default_factory=dict)

    def render_tsv(self) -> str:
        lines = ["metric\ttopic\tvalue"]
        for label, topics in self.per_metric.items():
            for topic_id in sorted(topics):
                lines.append(f"{label}\t{topic_id}\t{topics[topic_id]:.6f}")
            lines.append(f"{label}\tall\t{self.averages[label]:.6f}")
        return "\n".join(lines) + "\n"


def evaluate(run: RunFile, qrels: Qrels, specs: Sequence[MetricSpec]) -> MetricReport:
    per_metric: dict[str, dict[str, float]] = {}
    averages: dict[str, float] = {}
    for spec in specs:
        values = per_topic(spec.name, run, qrels, spec.k)
        per_metric[spec.label()] = values
        averages[spec.label()] = _macro(values)
    return MetricReport(per_metric, averages)


def evaluate_run(run_path: str, qrels_path: str, metric_specs: Sequence[str]) -> MetricReport:
    """Load a run and qrels from disk and compute every requested metric."""
    run = load_run(run_path)
    qrels = load_qrels(qrels_path)
    return evaluate(run, qrels, [MetricSpec.parse(s) for s in metric_specs])
