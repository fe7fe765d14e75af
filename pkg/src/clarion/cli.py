"""Command-line entry point: one binary, one subcommand per pipeline stage.

Subcommands: build-index, recall, build-dataset, build-understanding, rank,
evaluate, simulate.  Every subcommand accepts ``--config FILE`` (flat
key=value); explicit flags override config values.  Stdout carries
machine-parseable TSV only; diagnostics go to stderr.  Exit codes: 0 success,
1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Sequence

from clarion import bm25, dataset_builder, dialog, metrics
from clarion.config import Config, load_config, parse_scorers
from clarion.corpus_io import load_facet_scores, load_question_bank, load_train_records
from clarion.errors import ClarionError
from clarion.recall import recall_candidates, shortest_unseen_pool
from clarion.scoring import ensemble_rank, top_k

log = logging.getLogger("clarion")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clarion", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="flat key=value config file")
        return p

    p = add("build-index", "build the enhanced BM25 index and serialize it")
    p.add_argument("--bank", help="question bank TSV")
    p.add_argument("--train", help="training records TSV")
    p.add_argument("--out", required=True, help="output index file")
    p.add_argument("--k1", type=float, default=None)
    p.add_argument("--b", type=float, default=None)
    p.add_argument("--dump-tsv", help="also write a term/qid/tf debug dump")

    p = add("recall", "recall candidate questions for one request")
    p.add_argument("--bank", help="question bank TSV")
    p.add_argument("--train", help="training records TSV")
    p.add_argument("--index", help="serialized index (default: build in-process)")
    p.add_argument("--request", required=True, help="user request text")
    p.add_argument("--n-bm25", type=int, default=None)
    p.add_argument("--n-short", type=int, default=None)
    p.add_argument("--exclude", default="", help="comma-separated question ids to skip")

    p = add("build-dataset", "construct the point-wise ranking dataset")
    p.add_argument("--bank", help="question bank TSV")
    p.add_argument("--train", help="training records TSV")
    p.add_argument("--scores", help="facet score TSV")
    p.add_argument("--index", help="serialized index (default: build in-process)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--n-bm25", type=int, default=None)
    p.add_argument("--n-random", type=int, default=None)
    p.add_argument("--out", required=True)

    p = add("build-understanding", "construct the response-understanding dataset")
    p.add_argument("--train", help="training records TSV")
    p.add_argument("--scores", help="facet score TSV")
    p.add_argument("--out", required=True)

    p = add("rank", "recall + ensemble-rank candidates for one request")
    p.add_argument("--bank", help="question bank TSV")
    p.add_argument("--train", help="training records TSV")
    p.add_argument("--index", help="serialized index (default: build in-process)")
    p.add_argument("--context", required=True, help="request (plus context) text")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--scorers", default=None, help="e.g. lexical,remote:http://host:port")

    p = add("evaluate", "score a run file against qrels")
    p.add_argument("--run", required=True)
    p.add_argument("--qrels", help="4-column judgment file")
    p.add_argument(
        "--metric",
        action="append",
        default=None,
        help="metric spec, repeatable (mrr, mrr@100, p@3, ndcg@5, recall@30)",
    )

    p = add("simulate", "run multi-turn conversations against canned answers")
    p.add_argument("--bank", help="question bank TSV")
    p.add_argument("--train", help="training records TSV")
    p.add_argument("--index", help="serialized index (default: build in-process)")
    p.add_argument("--requests", help="file with one request per line")
    p.add_argument("--answers", help="TSV request\\tquestion_id\\tanswer")
    p.add_argument("--turn-limit", type=int, default=None)
    p.add_argument("--scorers", default=None)
    p.add_argument("--interactive", action="store_true", help="answer questions on stdin")

    return parser


def _config_for(args: argparse.Namespace) -> Config:
    return load_config(args.config) if args.config else Config()


def _pick(flag_value, config_value):
    return config_value if flag_value is None else flag_value


def _require(value, name: str):
    if value is None:
        raise ClarionError(f"missing required input {name!r} (flag or config)")
    return value


def _load_corpus(args, cfg: Config):
    bank = load_question_bank(_require(_pick(args.bank, cfg.bank), "bank"))
    records = load_train_records(_require(_pick(args.train, cfg.train), "train"))
    return bank, records


def _load_or_build_index(args, cfg: Config, bank, records):
    index_path = _pick(getattr(args, "index", None), cfg.index)
    if index_path:
        return bm25.load_index(index_path)
    params = bm25.Bm25Params(k1=cfg.bm25_k1, b=cfg.bm25_b)
    return bm25.build_enhanced_index(bank, records, params)


def _cmd_build_index(args, cfg: Config) -> int:
    bank, records = _load_corpus(args, cfg)
    params = bm25.Bm25Params(
        k1=_pick(args.k1, cfg.bm25_k1), b=_pick(args.b, cfg.bm25_b)
    )
    index = bm25.build_enhanced_index(bank, records, params)
    bm25.save_index(index, args.out)
    if args.dump_tsv:
        bm25.dump_postings_tsv(index, args.dump_tsv)
    log.info("indexed %d questions, %d terms -> %s", index.n_docs, len(index.postings), args.out)
    return 0


def _cmd_recall(args, cfg: Config) -> int:
    bank, records = _load_corpus(args, cfg)
    index = _load_or_build_index(args, cfg, bank, records)
    pool = shortest_unseen_pool(bank, records)
    exclude = {e for e in args.exclude.split(",") if e}
    candidates = recall_candidates(
        index,
        pool,
        args.request,
        n_bm25=_pick(args.n_bm25, cfg.recall_bm25),
        n_short=_pick(args.n_short, cfg.recall_short),
        exclude=exclude,
    )
    out = sys.stdout
    out.write("rank\tquestion_id\tsource\tscore\n")
    for rank, c in enumerate(candidates, start=1):
        out.write(f"{rank}\t{c.question_id}\t{c.source}\t{c.recall_score!r}\n")
    return 0


def _cmd_build_dataset(args, cfg: Config) -> int:
    bank, records = _load_corpus(args, cfg)
    scores = load_facet_scores(_require(_pick(args.scores, cfg.scores), "scores"))
    index = _load_or_build_index(args, cfg, bank, records)
    seed = _pick(args.seed, cfg.dataset_seed)
    examples = dataset_builder.build_ranking_dataset(
        records,
        bank,
        index,
        scores,
        seed=seed,
        n_bm25=_pick(args.n_bm25, cfg.dataset_neg_bm25),
        n_random=_pick(args.n_random, cfg.dataset_neg_random),
    )
    dataset_builder.write_ranking_dataset(examples, args.out, seed=seed)
    n_pos = sum(1 for e in examples if e.label == 1)
    log.info("wrote %d examples (%d positive, %d negative) -> %s",
             len(examples), n_pos, len(examples) - n_pos, args.out)
    return 0


def _cmd_build_understanding(args, cfg: Config) -> int:
    records = load_train_records(_require(_pick(args.train, cfg.train), "train"))
    scores = load_facet_scores(_require(_pick(args.scores, cfg.scores), "scores"))
    examples = dataset_builder.build_understanding_dataset(records, scores)
    dataset_builder.write_understanding_dataset(examples, args.out)
    n_need = sum(1 for e in examples if e.label == dataset_builder.NEED_CLARIFY)
    log.info("wrote %d examples (%d need_clarify, %d no_need_clarify) -> %s",
             len(examples), n_need, len(examples) - n_need, args.out)
    return 0


def _cmd_rank(args, cfg: Config) -> int:
    bank, records = _load_corpus(args, cfg)
    index = _load_or_build_index(args, cfg, bank, records)
    pool = shortest_unseen_pool(bank, records)
    scorers = parse_scorers(args.scorers) if args.scorers else cfg.scorer_handles()
    candidates = recall_candidates(
        index, pool, args.context, n_bm25=cfg.recall_bm25, n_short=cfg.recall_short
    )
    out = sys.stdout
    if not candidates:
        log.warning("no candidates recalled for this context")
        return 0
    ranked = top_k(ensemble_rank(scorers, args.context, candidates, bank), _pick(args.k, cfg.k))
    for rank, (qid, score) in enumerate(ranked, start=1):
        out.write(f"{rank}\t{qid}\t{score!r}\t{bank[qid]}\n")
    return 0


def _cmd_evaluate(args, cfg: Config) -> int:
    specs = args.metric if args.metric else cfg.metric_list()
    report = metrics.evaluate_run(args.run, _require(_pick(args.qrels, cfg.qrels), "qrels"), specs)
    sys.stdout.write(report.render_tsv())
    return 0


def _read_answer_oracle(path: str | None) -> dict[tuple[str, str], str]:
    if not path:
        return {}
    oracle: dict[tuple[str, str], str] = {}
    with open(path, "r", encoding="utf-8", newline="") as f:
        for line in f.read().splitlines():
            if not line or line.startswith("#"):
                continue
            request, qid, answer = line.split("\t")
            oracle[(request, qid)] = answer
    return oracle


def _make_deps(args, cfg: Config) -> dialog.PipelineDeps:
    bank, records = _load_corpus(args, cfg)
    index = _load_or_build_index(args, cfg, bank, records)
    pool = shortest_unseen_pool(bank, records)
    scorers = parse_scorers(args.scorers) if getattr(args, "scorers", None) else cfg.scorer_handles()
    return dialog.PipelineDeps(
        bank=bank,
        index=index,
        pool=pool,
        scorers=scorers,
        classifier=cfg.classifier_handle(),
        classifier_fallback=cfg.classifier_fallback,
        n_bm25=cfg.recall_bm25,
        n_short=cfg.recall_short,
        turn_limit=cfg.turn_limit,
    )


def _cmd_simulate(args, cfg: Config) -> int:
    deps = _make_deps(args, cfg)
    limit = _pick(args.turn_limit, cfg.turn_limit)
    if args.interactive:
        return _simulate_repl(deps, limit)
    if not args.requests:
        raise ClarionError("simulate needs --requests (or --interactive)")
    with open(args.requests, "r", encoding="utf-8") as f:
        requests = [line.strip() for line in f if line.strip()]
    oracle = _read_answer_oracle(args.answers)
    transcripts = dialog.simulate(requests, oracle, deps, turn_limit=limit)
    sys.stdout.write(dialog.render_transcripts(transcripts))
    return 0


def _simulate_repl(deps: dialog.PipelineDeps, limit: int) -> int:
    err = sys.stderr
    while True:
        err.write("request> ")
        err.flush()
        line = sys.stdin.readline()
        if not line or not line.strip():
            return 0
        state = dialog.ConversationState(initial_request=line.strip(), turn_limit=limit)
        exchanges: list[dialog.Exchange] = []
        while True:
            outcome = dialog.step(state, deps)
            if outcome.action == dialog.CLEAR:
                reason = "turn_limit" if len(state.turns) >= limit else "clear"
                break
            err.write(f"clarify: {outcome.question_text}\nanswer> ")
            err.flush()
            answer = sys.stdin.readline().strip() or "no"
            state.add_turn(outcome.question_id, outcome.question_text, answer)
            exchanges.append(dialog.Exchange(outcome.question_id, outcome.question_text, answer))
        transcript = dialog.Transcript(state.initial_request, tuple(exchanges), reason)
        sys.stdout.write(dialog.render_transcripts([transcript]))
        sys.stdout.flush()


_COMMANDS = {
    "build-index": _cmd_build_index,
    "recall": _cmd_recall,
    "build-dataset": _cmd_build_dataset,
    "build-understanding": _cmd_build_understanding,
    "rank": _cmd_rank,
    "evaluate": _cmd_evaluate,
    "simulate": _cmd_simulate,
}


def run_command(argv: Sequence[str]) -> int:
    """Parse argv and execute; 0 success, 1 usage error, 2 data error."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code in (0, None) else 1
    try:
        cfg = _config_for(args)
        return _COMMANDS[args.command](args, cfg)
    except ClarionError as e:
        print(f"clarion: error: {e}", file=sys.stderr)
        return 2
    except (FileNotFoundError, IsADirectoryError) as e:
        print(f"clarion: error: {e}", file=sys.stderr)
        return 2
    except (OSError, UnicodeDecodeError, ValueError) as e:
        print(f"clarion: error: {e}", file=sys.stderr)
        return 2


def main() -> None:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(message)s")
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
