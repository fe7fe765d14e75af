"""Clarifying-question selection for conversational search.

The pipeline: an enhanced BM25 index recalls candidate questions from a fixed
bank, a multi-task scorer ensemble re-ranks them, and a dialog layer decides
when to stop asking.  See the README for the CLI surface.
"""

from clarion.bm25 import (
    Bm25Index,
    Bm25Params,
    bm25_score,
    build_enhanced_index,
    load_index,
    save_index,
    search,
    tokenize,
)
from clarion.corpus_io import (
    FacetScores,
    Qrels,
    QuestionBank,
    TrainRecord,
    load_facet_scores,
    load_qrels,
    load_question_bank,
    load_train_records,
)
from clarion.dataset_builder import (
    build_ranking_dataset,
    build_understanding_dataset,
    write_ranking_dataset,
    write_understanding_dataset,
)
from clarion.dialog import ConversationState, PipelineDeps, build_model_input, simulate, step
from clarion.errors import ClarionError, DataFormatError, RemoteUnavailable
from clarion.metrics import evaluate, evaluate_run, load_run, make_run
from clarion.recall import recall_candidates, shortest_unseen_pool
from clarion.scoring import (
    MultiTaskScore,
    ScorerHandle,
    ensemble_rank,
    multitask_loss,
    score_pairs,
    top_k,
)

__version__ = "0.1.0"

__all__ = [
    "Bm25Index",
    "Bm25Params",
    "ClarionError",
    "ConversationState",
    "DataFormatError",
    "FacetScores",
    "MultiTaskScore",
    "PipelineDeps",
    "Qrels",
    "QuestionBank",
    "RemoteUnavailable",
    "ScorerHandle",
    "TrainRecord",
    "bm25_score",
    "build_enhanced_index",
    "build_model_input",
    "build_ranking_dataset",
    "build_understanding_dataset",
    "ensemble_rank",
    "evaluate",
    "evaluate_run",
    "load_facet_scores",
    "load_index",
    "load_qrels",
    "load_question_bank",
    "load_run",
    "load_train_records",
    "make_run",
    "multitask_loss",
    "recall_candidates",
    "save_index",
    "score_pairs",
    "search",
    "shortest_unseen_pool",
    "simulate",
    "step",
    "tokenize",
    "top_k",
    "write_ranking_dataset",
    "write_understanding_dataset",
]
