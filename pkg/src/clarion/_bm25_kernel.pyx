# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loop: BM25 score accumulation over packed postings arrays.

Must stay arithmetically identical to ``_bm25_fallback.accumulate_scores``:
same expression tree, same accumulation order (term by term, postings in
stored order), no reassociation.
"""


def accumulate_scores(
    double[::1] scores,
    long long[::1] term_offsets,
    int[::1] post_doc,
    double[::1] post_tf,
    double[::1] idf,
    int[::1] term_ids,
    double[::1] norm,
    double k1,
):
    """Add each query term's weighted contribution into ``scores`` in place.

    scores: float64[n_docs], zeroed by the caller.
    term_ids: packed ids of the (deduplicated) query terms, in query order.
    norm: per-doc length normalization k1*(1-b+b*dl/avgdl), precomputed.
    """
    cdef Py_ssize_t i, j, d
    cdef long long t
    cdef double w, tf
    for i in range(term_ids.shape[0]):
        t = term_ids[i]
        w = idf[t]
        for j in range(term_offsets[t], term_offsets[t + 1]):
            d = post_doc[j]
            tf = post_tf[j]
            scores[d] += w * (tf * (k1 + 1.0)) / (tf + norm[d])
