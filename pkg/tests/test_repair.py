import pytest

from plancontrol import (
    OUTPUT_MARKER,
    CompletionStatus,
    ErrorCode,
    RepairLoopAborted,
    ScriptedBackend,
    SpinFeedback,
    ValidationError,
    build_repair_prompt,
    run_validation_repair,
    validate_plan_text,
)

from conftest import VALID_TWO_STEP_TEXT, read_golden

BASE_PROMPT = (
    "You are a planning agent for industrial asset operations.\n"
    "Decompose the user question into a DAG plan using the available agents.\n"
    "\n"
    "Question: What assets can be found at the MAIN site?\n"
    "\n"
    "Output (your generated plan) :\n"
)

BAD_PLAN = (
    "#Task1: List the assets available at SiteX.\n"
    "#Agent1: IoT Data Downloader\n"
    "#Dependency1: None\n"
    "#ExpectedOutput1: A list of assets at SiteX.\n"
)

GOOD_SINGLE = (
    "#Task1: List the assets available at the MAIN site.\n"
    "#Agent1: IoT Data Download\n"
    "#Dependency1: None\n"
    "#ExpectedOutput1: A list of assets at the MAIN site."
)


def errors_for(plan_text, registry):
    return list(validate_plan_text(plan_text, registry).errors)


class TestBuildRepairPrompt:
    def test_full_feedback_matches_golden(self):
        feedback = SpinFeedback(
            rationale=(
                "The candidate answer contains the correct list of assets at the "
                "MAIN site, but it is mixed with irrelevant information about "
                "other assets and sites."
            ),
            status=CompletionStatus.PARTIALLY_ACCOMPLISHED,
            can_answer_now=True,
            stop_index=1,
            truncated_plan_text=GOOD_SINGLE,
        )
        errors = [
            ValidationError(
                ErrorCode.AGENT_UNKNOWN,
                "Agent1 unknown 'IoT Data Downloader'. Allowed: ['IoT Data Download']",
            ),
            ValidationError(
                ErrorCode.DEP_FORWARD_REF,
                "Dependency2 forward reference [2]; only past steps allowed",
            ),
        ]
        prompt = build_repair_prompt(BASE_PROMPT, BAD_PLAN.rstrip("\n"), errors, feedback)
        assert prompt == read_golden("repair_full.txt")

    def test_no_feedback_no_errors_matches_golden(self):
        prompt = build_repair_prompt(BASE_PROMPT, GOOD_SINGLE, [], None)
        assert prompt == read_golden("repair_minimal.txt")

    def test_partial_feedback_matches_golden(self):
        feedback = SpinFeedback(
            rationale="The truncated plan targets SiteX, but the question asks about the MAIN site.",
            status=CompletionStatus.NOT_ACCOMPLISHED,
        )
        errors = [
            ValidationError(
                ErrorCode.TASK_NUMBERS_NOT_SEQ,
                "Task numbers must be 1..N in order; got [1, 3]",
            )
        ]
        prompt = build_repair_prompt(BASE_PROMPT, BAD_PLAN.rstrip("\n"), errors, feedback)
        assert prompt == read_golden("repair_mixed.txt")

    def test_marker_appears_exactly_once_at_end(self, iot_registry):
        prompt = build_repair_prompt(BASE_PROMPT, BAD_PLAN, errors_for(BAD_PLAN, iot_registry))
        assert prompt.count(OUTPUT_MARKER) == 1
        assert prompt.endswith(OUTPUT_MARKER)

    def test_marker_absent_from_base_is_tolerated(self):
        prompt = build_repair_prompt("plan something", GOOD_SINGLE, [])
        assert prompt.count(OUTPUT_MARKER) == 1
        assert prompt.endswith(OUTPUT_MARKER)

    def test_error_bullets_use_messages_only(self, iot_registry):
        errors = errors_for(BAD_PLAN, iot_registry)
        prompt = build_repair_prompt(BASE_PROMPT, BAD_PLAN, errors)
        assert "Issues detected by the validator:" in prompt
        for error in errors:
            assert f"- {error.message}" in prompt
            assert error.code.value not in prompt

    def test_no_issue_boilerplate_when_error_free(self):
        prompt = build_repair_prompt(BASE_PROMPT, GOOD_SINGLE, [])
        assert "No structural issues were detected by the validator." in prompt

    def test_unknown_status_renders_when_missing(self):
        prompt = build_repair_prompt(
            BASE_PROMPT, GOOD_SINGLE, [], SpinFeedback(rationale="looks fine")
        )
        assert "- Status: Unknown" in prompt

    def test_byte_determinism(self, iot_registry):
        errors = errors_for(BAD_PLAN, iot_registry)
        first = build_repair_prompt(BASE_PROMPT, BAD_PLAN, errors)
        second = build_repair_prompt(BASE_PROMPT, BAD_PLAN, errors)
        assert first == second


class TestRunValidationRepair:
    def test_invalid_then_valid_returns_after_two_attempts(self, iot_registry):
        planner = ScriptedBackend(script=[BAD_PLAN, VALID_TWO_STEP_TEXT])
        outcome = run_validation_repair(BASE_PROMPT, planner, iot_registry, retry_budget=3)
        assert outcome.valid
        assert outcome.attempts == 2
        assert len(outcome.reports) == 2
        assert outcome.plan_text == VALID_TWO_STEP_TEXT

    def test_valid_first_with_zero_budget(self, iot_registry):
        planner = ScriptedBackend(script=[VALID_TWO_STEP_TEXT])
        outcome = run_validation_repair(BASE_PROMPT, planner, iot_registry, retry_budget=0)
        assert outcome.valid
        assert outcome.attempts == 1

    def test_always_invalid_exhausts_budget(self, iot_registry):
        planner = ScriptedBackend(script=[BAD_PLAN] * 3)
        outcome = run_validation_repair(BASE_PROMPT, planner, iot_registry, retry_budget=2)
        assert not outcome.valid
        assert outcome.attempts == 3
        assert len(outcome.reports) == 3
        assert outcome.plan_text is None
        assert outcome.last_errors

    def test_repair_round_embeds_latest_plan_and_errors(self, iot_registry):
        planner = ScriptedBackend(script=[BAD_PLAN, VALID_TWO_STEP_TEXT])
        run_validation_repair(BASE_PROMPT, planner, iot_registry)
        # First call saw the base prompt; second saw the repair prompt.
        assert planner.audit_log[0]["tokens_in"] < planner.audit_log[1]["tokens_in"]

    def test_transport_failure_aborts_with_attempt_count(self, iot_registry):
        planner = ScriptedBackend(script=[BAD_PLAN])  # exhausted on repair round
        with pytest.raises(RepairLoopAborted) as excinfo:
            run_validation_repair(BASE_PROMPT, planner, iot_registry, retry_budget=2)
        assert excinfo.value.attempts == 1

    def test_negative_budget_rejected(self, iot_registry):
        planner = ScriptedBackend(script=[VALID_TWO_STEP_TEXT])
        with pytest.raises(ValueError):
            run_validation_repair(BASE_PROMPT, planner, iot_registry, retry_budget=-1)


class TestSpinFeedback:
    def test_stop_index_must_be_positive(self):
        with pytest.raises(ValueError):
            SpinFeedback(rationale="r", stop_index=0)
