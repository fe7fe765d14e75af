"""Dialog orchestration: context rewriting, the gate, stepping, simulation."""

from __future__ import annotations

import pytest

from clarion.bm25 import build_enhanced_index
from clarion.dialog import (
    ASK,
    CLEAR,
    ConversationState,
    PipelineDeps,
    build_model_input,
    needs_clarification,
    render_transcripts,
    simulate,
    step,
)
from clarion.errors import RemoteUnavailable
from clarion.recall import shortest_unseen_pool
from clarion.scoring import ScorerHandle

from mock_service import MockScorerServer


def _state(request, *turns, limit=3):
    state = ConversationState(initial_request=request, turn_limit=limit)
    for i, (question, answer) in enumerate(turns):
        state.add_turn(f"q{i}", question, answer)
    return state


def _deps(bank, records, **kwargs):
    index = build_enhanced_index(bank, records)
    return PipelineDeps(
        bank=bank,
        index=index,
        pool=shortest_unseen_pool(bank, records),
        scorers=[ScorerHandle(kind="lexical")],
        **kwargs,
    )


class TestBuildModelInput:
    def test_yes_appends_question(self):
        state = _state(
            "Tell me about Obama family tree.",
            (
                "would you like to know about obamas ancestors",
                "yes particualarly information about his parents and grandparents",
            ),
        )
        assert build_model_input(state) == (
            "Tell me about Obama family tree. would you like to know about obamas ancestors"
        )

    def test_no_appends_nothing(self):
        state = _state("Tell me about Obama family tree.", ("some question", "No."))
        assert build_model_input(state) == "Tell me about Obama family tree."

    def test_other_answer_appended(self):
        state = _state(
            "I want to know about appraisals.",
            ("what kind of appraisal", "I need information about antique appraisals."),
        )
        assert build_model_input(state) == (
            "I want to know about appraisals. I need information about antique appraisals."
        )

    def test_yes_checked_before_no(self):
        state = _state("base request", ("some question text", "yes and no honestly"))
        assert build_model_input(state) == "base request some question text"

    def test_token_match_not_substring(self):
        # "noise" and "yesterday" must not trigger the yes/no rules.
        state = _state("base request", ("q", "there was noise yesterday"))
        assert build_model_input(state) == "base request there was noise yesterday"

    def test_case_insensitive_tokens(self):
        state = _state("base", ("the question", "YES"))
        assert build_model_input(state) == "base the question"

    def test_multiple_turns_in_order(self):
        state = _state(
            "base",
            ("first question", "yes"),
            ("second question", "no"),
            ("third question", "something about blue kitchens entirely"),
        )
        assert build_model_input(state) == (
            "base first question something about blue kitchens entirely"
        )

    def test_prefix_property(self):
        state = _state("the initial request", ("q1", "maybe"), ("q2", "yes"))
        assert build_model_input(state).startswith("the initial request")

    def test_deterministic(self):
        state = _state("base", ("q", "some answer text here"))
        assert build_model_input(state) == build_model_input(state)


class TestConversationState:
    def test_repeat_question_rejected(self):
        state = ConversationState(initial_request="r")
        state.add_turn("q1", "text", "yes")
        with pytest.raises(ValueError):
            state.add_turn("q1", "text", "no")

    def test_turn_limit_enforced(self):
        state = ConversationState(initial_request="r", turn_limit=1)
        state.add_turn("q1", "text", "yes")
        with pytest.raises(ValueError):
            state.add_turn("q2", "other", "no")

    def test_turns_track_asked_ids(self):
        state = ConversationState(initial_request="r")
        state.add_turn("q1", "text", "yes")
        state.add_turn("q2", "other", "no")
        assert len(state.turns) == len(state.asked_ids) == 2


class TestNeedsClarification:
    def test_empty_turns(self):
        assert needs_clarification(_state("request")) is True

    def test_heuristic_informative_answer(self):
        state = _state("r", ("q", "I need information about antique appraisals."))
        assert needs_clarification(state) is False

    def test_heuristic_yes_answer(self):
        assert needs_clarification(_state("r", ("q", "yes"))) is True

    def test_heuristic_no_token_in_long_answer(self):
        state = _state("r", ("q", "No, I would like to find restaurants there."))
        assert needs_clarification(state) is True

    def test_heuristic_short_answer(self):
        assert needs_clarification(_state("r", ("q", "the cheap one"))) is True

    def test_classifier_passthrough(self):
        with MockScorerServer() as server:
            handle = ScorerHandle(kind="remote", base_url=server.base_url)
            state = _state("r", ("q", "yes"))
            server.classify_force = False
            assert needs_clarification(state, classifier=handle) is False
            server.classify_force = True
            assert needs_clarification(state, classifier=handle) is True

    def test_classifier_down_raises(self):
        handle = ScorerHandle(kind="remote", base_url="http://127.0.0.1:1", timeout=0.5)
        state = _state("r", ("q", "yes"))
        with pytest.raises(RemoteUnavailable):
            needs_clarification(state, classifier=handle)

    def test_classifier_down_falls_back_when_configured(self):
        handle = ScorerHandle(kind="remote", base_url="http://127.0.0.1:1", timeout=0.5)
        state = _state("r", ("q", "I need information about antique appraisals."))
        assert needs_clarification(state, classifier=handle, fallback_on_error=True) is False


class TestStep:
    def test_fresh_request_asks(self, tiny_bank, tiny_records):
        deps = _deps(tiny_bank, tiny_records)
        state = ConversationState(initial_request="I want to know about appraisals.")
        outcome = step(state, deps)
        assert outcome.action == ASK
        assert outcome.question_id in tiny_bank
        assert outcome.question_text == tiny_bank[outcome.question_id]

    def test_turn_limit_clears(self, tiny_bank, tiny_records):
        deps = _deps(tiny_bank, tiny_records)
        state = ConversationState(initial_request="anything", turn_limit=0)
        assert step(state, deps).action == CLEAR

    def test_gate_clear_stops(self, tiny_bank, tiny_records):
        deps = _deps(tiny_bank, tiny_records)
        state = ConversationState(initial_request="cheap flights")
        state.add_turn("Q01", tiny_bank["Q01"], "I want the cheapest red eye option")
        assert step(state, deps).action == CLEAR

    def test_next_ask_differs_after_no(self, tiny_bank, tiny_records):
        deps = _deps(tiny_bank, tiny_records)
        state = ConversationState(initial_request="cheap flights to rome")
        first = step(state, deps)
        assert first.action == ASK
        state.add_turn(first.question_id, first.question_text, "No.")
        second = step(state, deps)
        assert second.action == ASK
        assert second.question_id != first.question_id

    def test_no_candidates_clears(self, tiny_bank, tiny_records):
        deps = _deps(tiny_bank, tiny_records, n_bm25=0, n_short=0)
        state = ConversationState(initial_request="cheap flights")
        assert step(state, deps).action == CLEAR


class TestSimulate:
    def test_all_no_yields_distinct_questions(self, tiny_bank, tiny_records):
        deps = _deps(tiny_bank, tiny_records)
        [transcript] = simulate(["cheap flights to rome"], {}, deps, turn_limit=5)
        ids = [ex.question_id for ex in transcript.exchanges]
        assert len(ids) == len(set(ids))
        assert transcript.stop_reason in ("clear", "turn_limit")

    def test_turn_limit_zero_asks_nothing(self, tiny_bank, tiny_records):
        deps = _deps(tiny_bank, tiny_records)
        transcripts = simulate(["a request", "another request"], {}, deps, turn_limit=0)
        assert all(t.exchanges == () for t in transcripts)
        assert all(t.stop_reason == "turn_limit" for t in transcripts)

    def test_oracle_answers_used(self, tiny_bank, tiny_records):
        deps = _deps(tiny_bank, tiny_records)
        state = ConversationState(initial_request="cheap flights to rome")
        first = step(state, deps)
        oracle = {("cheap flights to rome", first.question_id): "I fly with the green airline mostly"}
        [transcript] = simulate(["cheap flights to rome"], oracle, deps, turn_limit=3)
        assert transcript.exchanges[0].answer_text == "I fly with the green airline mostly"
        # informative answer closes the conversation at the next gate check
        assert transcript.stop_reason == "clear"
        assert len(transcript.exchanges) == 1

    def test_run_twice_byte_identical(self, tiny_bank, tiny_records):
        deps = _deps(tiny_bank, tiny_records)
        requests = ["cheap flights to rome", "hotel near airport", "obama family tree"]
        a = render_transcripts(simulate(requests, {}, deps, turn_limit=3))
        b = render_transcripts(simulate(requests, {}, deps, turn_limit=3))
        assert a == b

    def test_turn_limit_respected(self, rich_corpus):
        bank, records = rich_corpus
        deps = _deps(bank, records)
        oracle_answers_yes = {}
        transcripts = simulate(
            ["do you want music travel weather"], oracle_answers_yes, deps, turn_limit=2
        )
        assert len(transcripts[0].exchanges) <= 2


class TestRenderTranscripts:
    def test_format(self, tiny_bank, tiny_records):
        deps = _deps(tiny_bank, tiny_records)
        text = render_transcripts(simulate(["cheap flights to rome"], {}, deps, turn_limit=1))
        lines = text.splitlines()
        assert lines[0] == "# conversation 1"
        assert lines[1] == "0\tuser\tcheap flights to rome"
        assert lines[2].startswith("1\tsystem\t")
        assert lines[3] == "1\tuser\tno"
        assert lines[4].endswith("turn_limit")
        assert text.endswith("\n")
