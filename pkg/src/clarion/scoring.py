"""Point-wise scorers, the probability-sum ensemble, and the ranking loss.

Three scorer kinds hide behind one contract:

- ``lexical``: deterministic token-Jaccard reference scorer, no model needed.
- ``precomputed``: looks pairs up in a ``context\\tquestion\\tprob\\tmrr\\tndcg``
  TSV produced offline.
- ``remote``: HTTP POST ``<base>/v1/score`` with body
  ``{"pairs": [{"context": "...", "question": "..."}]}`` and response
  ``{"scores": [{"prob": p, "mrr": m, "ndcg": n}]}``; any non-200 status,
  transport failure, or protocol violation raises RemoteUnavailable.

The ensemble sums each candidate's probabilities over all scorers and sorts
descending, ties broken by ascending question_id.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import requests

from clarion.bm25 import tokenize
from clarion.corpus_io import QuestionBank
from clarion.errors import (
    DuplicateId,
    MalformedRow,
    MissingPrecomputedScore,
    RemoteUnavailable,
    ValueOutOfRange,
)
from clarion.recall import Candidate

LOSS_EPS = 1e-7
SCORE_ENDPOINT = "/v1/score"
CLASSIFY_ENDPOINT = "/v1/classify"
PRECOMPUTED_HEADER = "context\tquestion\tprob\tmrr\tndcg"


@dataclass(frozen=True)
class ScoreRequestPair:
    context_text: str
    question_text: str

    def __post_init__(self):
        if not self.context_text:
            raise ValueError("context_text must be non-empty")


@dataclass(frozen=True)
class MultiTaskScore:
    prob: float
    mrr_pred: float
    ndcg_pred: float

    def __post_init__(self):
        for name in ("prob", "mrr_pred", "ndcg_pred"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")


@dataclass(frozen=True)
class ScorerHandle:
    """Configuration for one pluggable scorer.

    kind "lexical" needs no settings; "precomputed" needs ``path``;
    "remote" needs ``base_url``.
    """

    kind: str  # "lexical" | "precomputed" | "remote"
    path: str | None = None
    base_url: str | None = None
    timeout: float = 10.0
    batch_size: int = 64
    max_in_flight: int = 4

    def __post_init__(self):
        if self.kind not in ("lexical", "precomputed", "remote"):
            raise ValueError(f"unknown scorer kind {self.kind!r}")
        if self.kind == "precomputed" and not self.path:
            raise ValueError("precomputed scorer requires a score-file path")
        if self.kind == "remote" and not self.base_url:
            raise ValueError("remote scorer requires a base URL")


def lexical_score(pair: ScoreRequestPair) -> MultiTaskScore:
    """Token Jaccard between context and question; 0 when the union is empty."""
    ctx = set(tokenize(pair.context_text))
    q = set(tokenize(pair.question_text))
    union = ctx | q
    prob = len(ctx & q) / len(union) if union else 0.0
    return MultiTaskScore(prob=prob, mrr_pred=prob, ndcg_pred=prob)


@lru_cache(maxsize=8)
def _load_precomputed(path: str) -> dict[tuple[str, str], MultiTaskScore]:
    table: dict[tuple[str, str], MultiTaskScore] = {}
    with open(path, "r", encoding="utf-8", newline="") as f:
        for line_no, line in enumerate(f.read().splitlines(), start=1):
            if not line or (line_no == 1 and line == PRECOMPUTED_HEADER):
                continue
            cols = line.split("\t")
            if len(cols) != 5:
                raise MalformedRow(
                    f"expected 5 columns, got {len(cols)}", path=path, line_no=line_no
                )
            context, question, prob_s, mrr_s, ndcg_s = cols
            try:
                prob, mrr, ndcg = float(prob_s), float(mrr_s), float(ndcg_s)
            except ValueError:
                raise MalformedRow("non-numeric score", path=path, line_no=line_no)
            key = (context, question)
            if key in table:
                raise DuplicateId(f"duplicate pair {key}", path=path, line_no=line_no)
            try:
                table[key] = MultiTaskScore(prob=prob, mrr_pred=mrr, ndcg_pred=ndcg)
            except ValueError as e:
                raise ValueOutOfRange(str(e), path=path, line_no=line_no)
    return table


def _parse_remote_scores(payload: object, expected: int) -> list[MultiTaskScore]:
    if not isinstance(payload, dict) or not isinstance(payload.get("scores"), list):
        raise RemoteUnavailable("malformed response body: missing 'scores' list")
    raw = payload["scores"]
    if len(raw) != expected:
        raise RemoteUnavailable(f"expected {expected} scores, got {len(raw)}")
    out = []
    for item in raw:
        try:
            out.append(
                MultiTaskScore(
                    prob=float(item["prob"]),
                    mrr_pred=float(item["mrr"]),
                    ndcg_pred=float(item["ndcg"]),
                )
            )
        except (TypeError, KeyError, ValueError) as e:
            raise RemoteUnavailable(f"malformed score entry {item!r}: {e}")
    return out


def _post_json(url: str, body: dict, timeout: float) -> object:
    try:
        resp = requests.post(url, json=body, timeout=timeout)
    except requests.RequestException as e:
        raise RemoteUnavailable(f"POST {url} failed: {e}")
    if resp.status_code != 200:
        raise RemoteUnavailable(f"POST {url} returned status {resp.status_code}")
    try:
        return resp.json()
    except ValueError as e:
        raise RemoteUnavailable(f"POST {url} returned non-JSON body: {e}")


def _score_remote(scorer: ScorerHandle, pairs: Sequence[ScoreRequestPair]) -> list[MultiTaskScore]:
    url = scorer.base_url.rstrip("/") + SCORE_ENDPOINT
    chunks = [
        pairs[i : i + scorer.batch_size] for i in range(0, len(pairs), scorer.batch_size)
    ]

    def one(chunk: Sequence[ScoreRequestPair]) -> list[MultiTaskScore]:
        body = {
            "pairs": [
                {"context": p.context_text, "question": p.question_text} for p in chunk
            ]
        }
        return _parse_remote_scores(_post_json(url, body, scorer.timeout), len(chunk))

    if len(chunks) == 1:
        results = [one(chunks[0])]
    else:
        with ThreadPoolExecutor(max_workers=scorer.max_in_flight) as pool:
            results = list(pool.map(one, chunks))
    return [s for chunk_scores in results for s in chunk_scores]


def score_pairs(
    scorer: ScorerHandle, pairs: Sequence[ScoreRequestPair]
) -> list[MultiTaskScore]:
    """Score every pair, order-aligned with the input."""
    if not pairs:
        raise ValueError("pairs must be non-empty")
    if scorer.kind == "lexical":
        return [lexical_score(p) for p in pairs]
    if scorer.kind == "precomputed":
        table = _load_precomputed(scorer.path)
        out = []
        for p in pairs:
            key = (p.context_text, p.question_text)
            if key not in table:
                raise MissingPrecomputedScore(f"no precomputed score for {key}")
            out.append(table[key])
        return out
    return _score_remote(scorer, pairs)


def classify_items(
    scorer: ScorerHandle, items: Sequence[tuple[str, str]]
) -> list[tuple[bool, float]]:
    """POST (question, answer) items to ``/v1/classify``; returns (need_clarify, prob)."""
    if scorer.kind != "remote":
        raise ValueError("classification requires a remote scorer handle")
    url = scorer.base_url.rstrip("/") + CLASSIFY_ENDPOINT
    body = {"items": [{"question": q, "answer": a} for q, a in items]}
    payload = _post_json(url, body, scorer.timeout)
    if not isinstance(payload, dict) or not isinstance(payload.get("labels"), list):
        raise RemoteUnavailable("malformed response body: missing 'labels' list")
    raw = payload["labels"]
    if len(raw) != len(items):
        raise RemoteUnavailable(f"expected {len(items)} labels, got {len(raw)}")
    out = []
    for item in raw:
        try:
            out.append((bool(item["need_clarify"]), float(item["prob"])))
        except (TypeError, KeyError, ValueError) as e:
            raise RemoteUnavailable(f"malformed label entry {item!r}: {e}")
    return out


def ensemble_rank(
    scorers: Sequence[ScorerHandle],
    context: str,
    candidates: Sequence[Candidate],
    bank: QuestionBank,
) -> list[tuple[str, float]]:
    """Rank candidates by the sum of scorer probabilities.

    Descending by summed probability, ties broken by ascending question_id.
    """
    if not scorers:
        raise ValueError("at least one scorer is required")
    if not candidates:
        raise ValueError("candidates must be non-empty")
    pairs = [
        ScoreRequestPair(context_text=context, question_text=bank[c.question_id])
        for c in candidates
    ]
    totals = [0.0] * len(candidates)
    for scorer in scorers:
        for i, score in enumerate(score_pairs(scorer, pairs)):
            totals[i] += score.prob
    ranked = sorted(
        zip((c.question_id for c in candidates), totals),
        key=lambda e: (-e[1], e[0]),
    )
    return ranked


def top_k(ranked: Sequence[tuple[str, float]], k: int = 30) -> list[tuple[str, float]]:
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return list(ranked[:k])


def multitask_loss(
    pred: MultiTaskScore, label: int, mrr_target: float, ndcg_target: float
) -> float:
    """Binary cross entropy plus the two squared regression errors.

    The probability is clamped to [eps, 1-eps] (eps = 1e-7) before the log.
    """
    if label not in (0, 1):
        raise ValueError(f"label must be 0 or 1, got {label}")
    p = min(max(pred.prob, LOSS_EPS), 1.0 - LOSS_EPS)
    bce = -(label * math.log(p) + (1 - label) * math.log(1.0 - p))
    return (
        bce
        + (pred.ndcg_pred - ndcg_target) ** 2
        + (pred.mrr_pred - mrr_target) ** 2
    )


def multitask_loss_batch(
    preds: Sequence[MultiTaskScore],
    labels: Sequence[int],
    mrr_targets: Sequence[float],
    ndcg_targets: Sequence[float],
) -> float:
    """Batch reduction: arithmetic mean of each loss term across the batch."""
    if not preds:
        raise ValueError("empty batch")
    if not (len(preds) == len(labels) == len(mrr_targets) == len(ndcg_targets)):
        raise ValueError("batch inputs must be the same length")
    total = 0.0
    for pred, y, mt, nt in zip(preds, labels, mrr_targets, ndcg_targets):
        total += multitask_loss(pred, y, mt, nt)
    return total / len(preds)
