"""Multi-turn orchestration: understanding gate, context rewrite, ask/stop.

The model input is rewritten turn by turn: a "yes" in the answer appends the
clarifying question to the running request, a "no" appends nothing, and any
other answer appends the answer text itself ("yes" wins when both tokens
occur).  Already-asked questions are excluded from recall, so a question id
never repeats within one conversation.

A ConversationState is single-owner (no concurrent mutation); independent
conversations may run in parallel over the shared immutable index and pool.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from clarion.bm25 import Bm25Index, tokenize
from clarion.corpus_io import QuestionBank
from clarion.errors import RemoteUnavailable
from clarion.recall import QnaPool, recall_candidates
from clarion.scoring import ScorerHandle, classify_items, ensemble_rank

log = logging.getLogger(__name__)

ASK = "ask"
CLEAR = "clear"


@dataclass
class ConversationState:
    initial_request: str
    turn_limit: int = 3
    turns: list[tuple[str, str]] = field(default_factory=list)
    asked_ids: set[str] = field(default_factory=set)

    def add_turn(self, question_id: str, question_text: str, answer_text: str) -> None:
        if question_id in self.asked_ids:
            raise ValueError(f"question {question_id!r} was already asked")
        if len(self.turns) >= self.turn_limit:
            raise ValueError(f"turn limit {self.turn_limit} reached")
        self.turns.append((question_text, answer_text))
        self.asked_ids.add(question_id)


@dataclass(frozen=True)
class StepOutcome:
    action: str  # "ask" | "clear"
    question_id: str | None = None
    question_text: str | None = None

    @classmethod
    def ask(cls, question_id: str, question_text: str) -> "StepOutcome":
        return cls(action=ASK, question_id=question_id, question_text=question_text)

    @classmethod
    def clear(cls) -> "StepOutcome":
        return cls(action=CLEAR)


@dataclass
class PipelineDeps:
    """Shared read-only dependencies for stepping conversations."""

    bank: QuestionBank
    index: Bm25Index
    pool: QnaPool
    scorers: Sequence[ScorerHandle]
    classifier: ScorerHandle | None = None
    classifier_fallback: bool = False
    n_bm25: int = 100
    n_short: int = 100
    turn_limit: int = 3


def _has_token(text: str, token: str) -> bool:
    return token in tokenize(text)


def build_model_input(state: ConversationState) -> str:
    """Rewrite the request with the conversation context, yes/no aware."""
    parts = [state.initial_request]
    for question_text, answer_text in state.turns:
        if _has_token(answer_text, "yes"):
            parts.append(question_text)
        elif _has_token(answer_text, "no"):
            pass
        else:
            parts.append(answer_text)
    return " ".join(parts)


def _heuristic_needs_clarification(answer_text: str) -> bool:
    # An informative free-form answer (no yes/no token, >= 4 tokens) reads as
    # the user having said enough; anything else keeps the gate open.
    tokens = tokenize(answer_text)
    informative = "yes" not in tokens and "no" not in tokens and len(tokens) >= 4
    return not informative


def needs_clarification(
    state: ConversationState,
    classifier: ScorerHandle | None = None,
    fallback_on_error: bool = False,
) -> bool:
    """Decide whether to keep clarifying, from the last (question, answer)."""
    if not state.turns:
        return True
    question_text, answer_text = state.turns[-1]
    if classifier is None:
        return _heuristic_needs_clarification(answer_text)
    try:
        labels = classify_items(classifier, [(question_text, answer_text)])
    except RemoteUnavailable:
        if not fallback_on_error:
            raise
        log.warning("classifier unavailable; falling back to the heuristic gate")
        return _heuristic_needs_clarification(answer_text)
    return labels[0][0]


def step(state: ConversationState, deps: PipelineDeps) -> StepOutcome:
    """One pipeline step: gate, recall with exclusions, rank, ask or stop."""
    if len(state.turns) >= state.turn_limit:
        return StepOutcome.clear()
    if not needs_clarification(state, deps.classifier, deps.classifier_fallback):
        return StepOutcome.clear()
    model_input = build_model_input(state)
    candidates = recall_candidates(
        deps.index,
        deps.pool,
        model_input,
        n_bm25=deps.n_bm25,
        n_short=deps.n_short,
        exclude=state.asked_ids,
    )
    if not candidates:
        log.warning("no candidates left for request %r; treating as clear", state.initial_request)
        return StepOutcome.clear()
    ranked = ensemble_rank(deps.scorers, model_input, candidates, deps.bank)
    best_id, _score = ranked[0]
    return StepOutcome.ask(best_id, deps.bank[best_id])


@dataclass(frozen=True)
class Exchange:
    question_id: str
    question_text: str
    answer_text: str


@dataclass(frozen=True)
class Transcript:
    initial_request: str
    exchanges: tuple[Exchange, ...]
    stop_reason: str  # "clear" | "turn_limit"


def simulate(
    requests: Sequence[str],
    answer_oracle: Mapping[tuple[str, str], str],
    deps: PipelineDeps,
    turn_limit: int | None = None,
) -> list[Transcript]:
    """Run each request to Clear or the turn limit against a canned user.

    The oracle maps (request, question_id) to an answer; asked questions it
    does not cover are answered "no".
    """
    limit = deps.turn_limit if turn_limit is None else turn_limit
    transcripts: list[Transcript] = []
    for request in requests:
        state = ConversationState(initial_request=request, turn_limit=limit)
        exchanges: list[Exchange] = []
        while True:
            outcome = step(state, deps)
            if outcome.action == CLEAR:
                reason = "turn_limit" if len(state.turns) >= limit else "clear"
                break
            answer = answer_oracle.get((request, outcome.question_id), "no")
            state.add_turn(outcome.question_id, outcome.question_text, answer)
            exchanges.append(Exchange(outcome.question_id, outcome.question_text, answer))
        transcripts.append(Transcript(request, tuple(exchanges), reason))
    return transcripts


def render_transcripts(transcripts: Sequence[Transcript]) -> str:
    """Line-delimited ``turn<TAB>role<TAB>text`` records, one block per request."""
    lines: list[str] = []
    for i, t in enumerate(transcripts, start=1):
        lines.append(f"# conversation {i}")
        lines.append(f"0\tuser\t{t.initial_request}")
        for turn, ex in enumerate(t.exchanges, start=1):
            lines.append(f"{turn}\tsystem\t{ex.question_text}")
            lines.append(f"{turn}\tuser\t{ex.answer_text}")
        lines.append(f"{len(t.exchanges)}\tstatus\t{t.stop_reason}")
    return "\n".join(lines) + "\n"
