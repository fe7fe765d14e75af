"""Pure-Python/numpy fallback for the BM25 scoring kernel.

Mirrors ``_bm25_kernel.accumulate_scores`` exactly: same expression tree and
the same per-term accumulation order, so results are bit-identical to the
compiled extension.
"""

from __future__ import annotations

import numpy as np


def accumulate_scores(scores, term_offsets, post_doc, post_tf, idf, term_ids, norm, k1):
    for t in term_ids:
        start, end = term_offsets[t], term_offsets[t + 1]
        docs = post_doc[start:end]
        tf = post_tf[start:end]
        contrib = idf[t] * (tf * (k1 + 1.0)) / (tf + norm[docs])
        np.add.at(scores, docs, contrib)
