"""Compare the compiled and pure-Python BM25 kernels on a synthetic corpus.

Checks that both kernels return bit-identical rankings before timing them,
then reports per-query latency and the relative speedup.

Usage:
    python3 benchmarks/bench_bm25.py --docs 20000 --queries 200 --repeats 5
"""

from __future__ import annotations

import argparse
import random
import sys
import time

from clarion.bm25 import build_enhanced_index, get_kernel, search
from clarion.corpus_io import QuestionBank

_WORDS = [
    "flight",
    "hotel",
    "music",
    "river",
    "engine",
    "garden",
    "window",
    "market",
    "signal",
    "copper",
    "forest",
    "harbor",
    "stone",
    "paper",
    "cloud",
    "light",
    "happy",
    "sudden",
    "travel",
    "winter",
]


def make_corpus(n_docs: int, seed: int) -> QuestionBank:
    rng = random.Random(seed)
    bank = {}
    for i in range(n_docs):
        words = [rng.choice(_WORDS) for _ in range(rng.randint(4, 12))]
        bank[f"q{i:06d}"] = " ".join(words)
    return QuestionBank(bank)


def make_queries(n_queries: int, seed: int) -> list[str]:
    rng = random.Random(seed + 1)
    return [
        " ".join(rng.choice(_WORDS) for _ in range(rng.randint(2, 6)))
        for _ in range(n_queries)
    ]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--docs", type=int, default=20000, help="corpus size")
    parser.add_argument("--queries", type=int, default=200, help="queries per repeat")
    parser.add_argument("--repeats", type=int, default=5, help="timed repeats; best wins")
    parser.add_argument("--k", type=int, default=30, help="results per query")
    parser.add_argument("--seed", type=int, default=13)
    args = parser.parse_args()

    bank = make_corpus(args.docs, args.seed)
    queries = make_queries(args.queries, args.seed)
    index = build_enhanced_index(bank, [])
    print(f"corpus: {index.n_docs} docs, {args.queries} queries, k={args.k}")

    kernels = {}
    for name in ("cython", "python"):
        try:
            kernels[name] = get_kernel(name)
        except (ValueError, ImportError):
            print(f"kernel {name!r} unavailable, skipping", file=sys.stderr)
    if not kernels:
        print("no kernels available", file=sys.stderr)
        return 1

    # parity first: identical results, not just close ones
    if len(kernels) == 2:
        for q in queries:
            a = search(index, q, k=args.k, kernel=kernels["cython"])
            b = search(index, q, k=args.k, kernel=kernels["python"])
            if a != b:
                print(f"kernel mismatch on query {q!r}", file=sys.stderr)
                return 1
        print("parity: identical top-k results across kernels")

    best: dict[str, float] = {}
    for name, kern in kernels.items():
        times = []
        for _ in range(args.repeats):
            started = time.perf_counter()
            for q in queries:
                search(index, q, k=args.k, kernel=kern)
            times.append(time.perf_counter() - started)
        best[name] = min(times)

    print(f"{'kernel':<8} {'total ms':>10} {'per query us':>14}")
    for name, total in sorted(best.items(), key=lambda e: e[1]):
        print(f"{name:<8} {total * 1e3:>10.2f} {total / args.queries * 1e6:>14.1f}")
    if len(best) == 2:
        print(f"speedup: {best['python'] / best['cython']:.2f}x (cython over python)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
