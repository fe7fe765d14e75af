"""Tokenization, enhanced inverted-index construction, and BM25 scoring/search.

The enhanced document for a bank question is its own tokens plus, for every
training record that asked it, the tokens of that record's initial request,
answer, and topic description.  Scoring uses the non-negative idf variant

    idf(t) = ln(1 + (N - df + 0.5) / (df + 0.5))

and the usual saturated term-frequency part, summed over *distinct* query
terms:

    idf(t) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * dl / avgdl))

The postings-accumulation inner loop runs in a compiled Cython kernel when
the extension is available, with a numpy fallback selected at import
(``CLARION_PURE_PYTHON=1`` forces the fallback).  Both kernels produce
bit-identical scores.

Indexes are write-once at build and immutable afterwards; concurrent
searches against a built index are safe.
"""

from __future__ import annotations

import math
import os
import re
import struct
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from clarion.corpus_io import QuestionBank, TrainRecord
from clarion.errors import BadIndexFile, EmptyBank, UnknownQuestionId

if os.environ.get("CLARION_PURE_PYTHON", "") not in ("", "0"):
    from clarion import _bm25_fallback as _kernel

    KERNEL_NAME = "python"
else:
    try:
        from clarion import _bm25_kernel as _kernel  # type: ignore[no-redef]

        KERNEL_NAME = "cython"
    except ImportError:
        from clarion import _bm25_fallback as _kernel  # type: ignore[no-redef]

        KERNEL_NAME = "python"

INDEX_MAGIC = b"CLIX1"

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def get_kernel(name: str):
    """Return a scoring kernel by name ('cython' or 'python'); for benchmarks."""
    if name == "python":
        from clarion import _bm25_fallback

        return _bm25_fallback
    if name == "cython":
        from clarion import _bm25_kernel

        return _bm25_kernel
    raise ValueError(f"unknown kernel {name!r}")


def tokenize(text: str) -> list[str]:
    """Lowercase and split on every non-alphanumeric character; no stemming."""
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class Bm25Params:
    k1: float = 1.2
    b: float = 0.75

    def __post_init__(self):
        if not self.k1 > 0:
            raise ValueError(f"k1 must be > 0, got {self.k1}")
        if not 0.0 <= self.b <= 1.0:
            raise ValueError(f"b must be in [0, 1], got {self.b}")


class Bm25Index:
    """Inverted index over enhanced question documents.

    Do not mutate after construction; all derived arrays are packed once.
    """

    def __init__(
        self,
        params: Bm25Params,
        postings: dict[str, list[tuple[str, int]]],
        doc_len: dict[str, int],
    ):
        self.params = params
        self.doc_len = {qid: doc_len[qid] for qid in sorted(doc_len)}
        self.postings = {
            term: sorted(postings[term]) for term in sorted(postings)
        }
        self.n_docs = len(self.doc_len)
        total = sum(self.doc_len.values())
        self.avgdl = total / self.n_docs if self.n_docs else 0.0
        self._pack()

    def _pack(self) -> None:
        self._doc_ids: tuple[str, ...] = tuple(self.doc_len)
        self._doc_index = {qid: i for i, qid in enumerate(self._doc_ids)}
        dl = np.array([self.doc_len[q] for q in self._doc_ids], dtype=np.float64)
        # avgdl > 0 whenever any postings exist; the 1.0 placeholder only
        # guards the all-empty-documents corpus, where no term can match.
        avgdl = self.avgdl if self.avgdl > 0 else 1.0
        k1, b = self.params.k1, self.params.b
        self._norm = k1 * (1.0 - b + b * dl / avgdl)
        self._terms: tuple[str, ...] = tuple(self.postings)
        self._term_index = {t: i for i, t in enumerate(self._terms)}
        offsets = [0]
        doc_idx: list[int] = []
        tfs: list[float] = []
        n = self.n_docs
        idf = np.empty(len(self._terms), dtype=np.float64)
        for i, term in enumerate(self._terms):
            plist = self.postings[term]
            df = len(plist)
            idf[i] = math.log(1.0 + (n - df + 0.5) / (df + 0.5))
            for qid, tf in plist:
                doc_idx.append(self._doc_index[qid])
                tfs.append(float(tf))
            offsets.append(len(doc_idx))
        self._idf = idf
        self._term_offsets = np.array(offsets, dtype=np.int64)
        self._post_doc = np.array(doc_idx, dtype=np.int32)
        self._post_tf = np.array(tfs, dtype=np.float64)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Bm25Index)
            and self.params == other.params
            and self.doc_len == other.doc_len
            and self.postings == other.postings
        )


def build_enhanced_index(
    bank: QuestionBank,
    records: Sequence[TrainRecord],
    params: Bm25Params = Bm25Params(),
) -> Bm25Index:
    """Index every bank question's text plus terms from its related records.

    Questions never asked in ``records`` index their own text only.  Term
    frequencies accumulate, so the result is invariant under permutation of
    ``records``.
    """
    if len(bank) == 0:
        raise EmptyBank("cannot index an empty question bank")
    extra: dict[str, Counter] = {}
    for r in records:
        if r.question_id not in bank:
            continue
        counts = extra.setdefault(r.question_id, Counter())
        counts.update(tokenize(r.initial_request))
        counts.update(tokenize(r.answer_text))
        counts.update(tokenize(r.topic_desc))
    postings: dict[str, list[tuple[str, int]]] = {}
    doc_len: dict[str, int] = {}
    for qid, text in bank.items():
        counts = Counter(tokenize(text))
        if qid in extra:
            counts.update(extra[qid])
        doc_len[qid] = sum(counts.values())
        for term, tf in counts.items():
            postings.setdefault(term, []).append((qid, tf))
    return Bm25Index(params, postings, doc_len)


def _dedup(tokens: Iterable[str]) -> list[str]:
    return list(dict.fromkeys(tokens))


def _score_all(index: Bm25Index, query_tokens: Sequence[str], kernel=None) -> np.ndarray:
    """Score every document against the deduplicated query terms."""
    kern = kernel if kernel is not None else _kernel
    term_ids = np.array(
        [index._term_index[t] for t in _dedup(query_tokens) if t in index._term_index],
        dtype=np.int32,
    )
    scores = np.zeros(index.n_docs, dtype=np.float64)
    if term_ids.size:
        kern.accumulate_scores(
            scores,
            index._term_offsets,
            index._post_doc,
            index._post_tf,
            index._idf,
            term_ids,
            index._norm,
            index.params.k1,
        )
    return scores


def bm25_score(index: Bm25Index, query: Sequence[str], qid: str) -> float:
    """Score one indexed question against tokenized query terms.

    Repeated query terms are counted once.  Matches ``search`` scores exactly
    (same accumulation order as the kernels).
    """
    if qid not in index._doc_index:
        raise UnknownQuestionId(f"question id {qid!r} is not indexed")
    d = index._doc_index[qid]
    norm_d = index._norm[d]
    k1 = index.params.k1
    score = 0.0
    for term in _dedup(query):
        t = index._term_index.get(term)
        if t is None:
            continue
        start, end = index._term_offsets[t], index._term_offsets[t + 1]
        pos = np.searchsorted(index._post_doc[start:end], d)
        if pos == end - start or index._post_doc[start + pos] != d:
            continue
        tf = index._post_tf[start + pos]
        score += index._idf[t] * (tf * (k1 + 1.0)) / (tf + norm_d)
    return float(score)


def search(
    index: Bm25Index, query_text: str, k: int, kernel=None
) -> list[tuple[str, float]]:
    """Top-k positive-score questions, descending score, ties by ascending id."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    scores = _score_all(index, tokenize(query_text), kernel=kernel)
    # Stable argsort of the negated scores: descending score, ties resolved
    # by ascending doc index, i.e. ascending question_id.
    order = np.argsort(-scores, kind="stable")
    out: list[tuple[str, float]] = []
    for i in order[:k]:
        s = scores[i]
        if s <= 0.0:
            break
        out.append((index._doc_ids[i], float(s)))
    return out


def save_index(index: Bm25Index, path: str) -> None:
    """Serialize to the versioned binary format (magic ``CLIX1``)."""
    parts: list[bytes] = [INDEX_MAGIC]
    parts.append(struct.pack("<dd", index.params.k1, index.params.b))
    parts.append(struct.pack("<I", index.n_docs))
    for qid in index._doc_ids:
        raw = qid.encode("utf-8")
        parts.append(struct.pack("<I", len(raw)))
        parts.append(raw)
        parts.append(struct.pack("<I", index.doc_len[qid]))
    parts.append(struct.pack("<I", len(index.postings)))
    for term, plist in index.postings.items():
        raw = term.encode("utf-8")
        parts.append(struct.pack("<I", len(raw)))
        parts.append(raw)
        parts.append(struct.pack("<I", len(plist)))
        for qid, tf in plist:
            parts.append(struct.pack("<II", index._doc_index[qid], tf))
    with open(path, "wb") as f:
        f.write(b"".join(parts))


class _Reader:
    def __init__(self, data: bytes, path: str):
        self.data = data
        self.path = path
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise BadIndexFile(f"{self.path}: truncated index file")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def f64(self) -> float:
        return struct.unpack("<d", self.take(8))[0]

    def text(self) -> str:
        return self.take(self.u32()).decode("utf-8")


def load_index(path: str) -> Bm25Index:
    with open(path, "rb") as f:
        data = f.read()
    r = _Reader(data, path)
    if r.take(len(INDEX_MAGIC)) != INDEX_MAGIC:
        raise BadIndexFile(f"{path}: bad magic, expected {INDEX_MAGIC!r}")
    k1, b = r.f64(), r.f64()
    n_docs = r.u32()
    doc_ids: list[str] = []
    doc_len: dict[str, int] = {}
    for _ in range(n_docs):
        qid = r.text()
        doc_len[qid] = r.u32()
        doc_ids.append(qid)
    postings: dict[str, list[tuple[str, int]]] = {}
    for _ in range(r.u32()):
        term = r.text()
        plist = []
        for _ in range(r.u32()):
            di, tf = struct.unpack("<II", r.take(8))
            if di >= n_docs:
                raise BadIndexFile(f"{path}: posting references doc {di} >= {n_docs}")
            plist.append((doc_ids[di], tf))
        postings[term] = plist
    if r.pos != len(data):
        raise BadIndexFile(f"{path}: {len(data) - r.pos} trailing bytes")
    return Bm25Index(Bm25Params(k1=k1, b=b), postings, doc_len)


def dump_postings_tsv(index: Bm25Index, path: str) -> None:
    """Debug dump: one ``term<TAB>qid<TAB>tf`` line per posting."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        for term, plist in index.postings.items():
            for qid, tf in plist:
                f.write(f"{term}\t{qid}\t{tf}\n")
