"""Shared fixtures plus the acceptance-summary reporter.

Tests marked ``@pytest.mark.acceptance("<criterion>")`` get one PASS/FAIL/SKIP
line each at the end of the run, so the release gate is readable at a glance.
Set ``CLARIQ_DATA_DIR`` to a directory holding the official corpus files to
run the data-conditional criteria against the real data.
"""

from __future__ import annotations

import random

import pytest

from clarion.bm25 import Bm25Params, build_enhanced_index
from clarion.corpus_io import QuestionBank, TrainRecord

# Stable display order for the acceptance summary.
_CRITERIA = [
    "metric-oracle-equivalence",
    "mrr-worked-example",
    "bm25-oracle-equivalence",
    "recall-composition",
    "dataset-builder",
    "understanding-labels",
    "ensemble-properties",
    "multitask-loss",
    "dialog-invariants",
    "sanity-band",
]

_RESULTS: dict[str, str] = {}
_NODE_CRITERION: dict[str, str] = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(criterion): release-gate test reported in the summary"
    )


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("acceptance")
        if marker is not None:
            _NODE_CRITERION[item.nodeid] = marker.args[0]


def pytest_runtest_logreport(report):
    criterion = _NODE_CRITERION.get(report.nodeid)
    if criterion is None:
        return
    if report.when == "call" and report.passed:
        _RESULTS.setdefault(criterion, "PASS")
    if report.failed:
        _RESULTS[criterion] = "FAIL"
    if report.skipped:
        _RESULTS.setdefault(criterion, "SKIP")


def pytest_terminal_summary(terminalreporter):
    if not _NODE_CRITERION:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for criterion in _CRITERIA:
        outcome = _RESULTS.get(criterion, "NOT RUN")
        terminalreporter.write_line(f"{outcome:7s} {criterion}")
    extras = sorted(set(_RESULTS) - set(_CRITERIA))
    for criterion in extras:
        terminalreporter.write_line(f"{_RESULTS[criterion]:7s} {criterion}")


# ---------------------------------------------------------------------------
# fixtures


@pytest.fixture
def tiny_bank() -> QuestionBank:
    return QuestionBank(
        {
            "Q01": "are you looking for cheap flights",
            "Q02": "which airline do you prefer",
            "Q03": "do you want a hotel near the airport",
            "Q04": "what is your budget",
            "Q05": "do you need travel insurance",
            "Q06": "would you like to know about obamas ancestors",
            "Q07": "what kind of appraisal are you looking for",
            "Q08": "why",
            "Q09": "how",
            "Q10": "do you want directions to a specific place",
        }
    )


def _record(topic, request, desc, facet, qid, question, answer) -> TrainRecord:
    return TrainRecord(
        topic_id=topic,
        initial_request=request,
        topic_desc=desc,
        facet_id=facet,
        question_id=qid,
        question_text=question,
        answer_text=answer,
    )


@pytest.fixture
def tiny_records(tiny_bank) -> list[TrainRecord]:
    return [
        _record(
            "T1",
            "find cheap flights to rome",
            "flights to rome in the spring",
            "F1",
            "Q01",
            tiny_bank["Q01"],
            "yes very cheap ones",
        ),
        _record(
            "T1",
            "find cheap flights to rome",
            "flights to rome in the spring",
            "F1",
            "Q02",
            tiny_bank["Q02"],
            "any airline is fine",
        ),
        _record(
            "T2",
            "hotel near airport",
            "hotels close to the airport",
            "F2",
            "Q03",
            tiny_bank["Q03"],
            "yes walking distance",
        ),
        _record(
            "T3",
            "tell me about obama family tree",
            "information about the obama family",
            "F3",
            "Q06",
            tiny_bank["Q06"],
            "yes particularly his parents",
        ),
    ]


_WORDS = (
    "music travel weather history science cooking garden finance health sports "
    "movie island bridge engine coffee planet window market basket yellow "
    "river mountain castle lantern pepper violin anchor meadow copper falcon"
).split()


def synthetic_corpus(n_questions: int, n_asked: int, seed: int = 2024):
    """A deterministic bank plus one training record per asked question."""
    rng = random.Random(seed)
    bank: dict[str, str] = {}
    for i in range(n_questions):
        length = rng.randint(3, 9)
        words = [rng.choice(_WORDS) for _ in range(length)]
        bank[f"S{i:04d}"] = "do you want " + " ".join(words)
    qbank = QuestionBank(bank)
    asked_ids = sorted(bank)[:n_asked]
    records = []
    for t, qid in enumerate(asked_ids):
        topic = f"T{t // 3:03d}"
        records.append(
            _record(
                topic,
                f"request about {rng.choice(_WORDS)} {rng.choice(_WORDS)}",
                f"details on {rng.choice(_WORDS)}",
                f"F{t % 3}",
                qid,
                bank[qid],
                rng.choice(["yes", "no", f"information about {rng.choice(_WORDS)} please"]),
            )
        )
    return qbank, records


@pytest.fixture
def rich_corpus():
    """Bank of 450 questions, 250 asked / 200 never asked."""
    return synthetic_corpus(450, 250)


@pytest.fixture
def rich_index(rich_corpus):
    bank, records = rich_corpus
    return build_enhanced_index(bank, records, Bm25Params())


def write_bank_tsv(path, bank: dict[str, str]) -> None:
    lines = ["question_id\tquestion"]
    lines += [f"{qid}\t{text}" for qid, text in bank.items()]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_train_tsv(path, records) -> None:
    lines = ["topic_id\tinitial_request\ttopic_desc\tfacet_id\tquestion_id\tquestion\tanswer"]
    for r in records:
        lines.append(
            "\t".join(
                [
                    r.topic_id,
                    r.initial_request,
                    r.topic_desc,
                    r.facet_id,
                    r.question_id,
                    r.question_text,
                    r.answer_text,
                ]
            )
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
