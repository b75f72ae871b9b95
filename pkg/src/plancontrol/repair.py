"""Error-conditioned plan repair: generate, validate, regenerate under a budget.

The loop asks the planner port for a plan, validates it, and on failure
feeds the detected error messages (plus any prefix-evaluation feedback)
back through a fixed repair prompt. The planner is invoked at most
``retry_budget + 1`` times; repair is prompt-mediated only, with no local
plan surgery.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .contract import ValidationError, ValidationReport, validate_plan_text
from .critic import CompletionStatus
from .errors import ScriptExhaustedError, TransportError
from .plan_model import AgentRegistry

OUTPUT_MARKER = "Output (your generated plan) :"

DEFAULT_RETRY_BUDGET = 3


@dataclass(frozen=True)
class SpinFeedback:
    """Prefix-evaluation feedback forwarded into the repair prompt."""

    rationale: str
    status: CompletionStatus | None = None
    can_answer_now: bool | None = None
    stop_index: int | None = None
    truncated_plan_text: str | None = None

    def __post_init__(self) -> None:
        if self.stop_index is not None and self.stop_index < 1:
            raise ValueError(f"stop_index must be >= 1, got {self.stop_index}")


@dataclass
class RepairOutcome:
    valid: bool
    plan_text: str | None
    last_errors: tuple[ValidationError, ...]
    attempts: int
    reports: list[ValidationReport] = field(default_factory=list)


class RepairLoopAborted(RuntimeError):
    """The planner port failed mid-loop; attempts-so-far are recorded."""

    def __init__(self, message: str, attempts: int):
        super().__init__(message)
        self.attempts = attempts


_NO_FEEDBACK_BLOCK = (
    "SPIN-style evaluation of the current plan is not available for this round.\n"
    "Assume the current plan may still be suboptimal and try to improve it based\n"
    "on the issues and the planning instructions."
)

_NO_ISSUES_BLOCK = (
    "No structural issues were detected by the validator. However, you should still\n"
    "consider the SPIN evaluation feedback above and improve the DAG minimally if needed."
)

_STOP_INDEX_NOTE = (
    "  (earliest step index after which SPIN believes the plan can already answer)"
)

_REPAIR_RULES = """Repair rules:
- Interpret the SPIN feedback as follows in your planning:
  * status: how complete and correct the current answer is.
  * can_answer_now=True: you may safely stop planning and keep the plan minimal.
  * stop_index: earliest step index after which the plan already supports answering.
- Use the SPIN evaluation feedback and the issues above to decide how to fix the plan.
- Construct the DAG using the bare minimum number of tasks required to satisfy the user question and constraints. Avoid redundant or unnecessary tasks.
- Make the minimal changes necessary; if there is no problem, you MUST output the Original Plan as-is.
- Do NOT output any explanation, comments, or markdown."""


def _remove_output_marker(base_prompt: str) -> str:
    """Drop the output-marker line exactly once; a no-op when absent."""
    lines = base_prompt.split("\n")
    for position, line in enumerate(lines):
        if line.strip() == OUTPUT_MARKER:
            del lines[position]
            break
    return "\n".join(lines).rstrip()


def _feedback_block(feedback: SpinFeedback | None) -> str:
    if feedback is None:
        return _NO_FEEDBACK_BLOCK
    status = feedback.status.value if feedback.status is not None else "Unknown"
    lines = [
        "SPIN-style evaluation of the current plan:",
        f"- Status: {status}",
    ]
    if feedback.can_answer_now is not None:
        lines.append(f"- can_answer_now: {feedback.can_answer_now}")
    if feedback.stop_index is not None:
        lines.append(f"- stop_index: {feedback.stop_index}")
        lines.append(_STOP_INDEX_NOTE)
    lines.append(f"- Critic rationale: {feedback.rationale}")
    block = "\n".join(lines)
    if feedback.truncated_plan_text:
        block += (
            "\n\nTruncated plan (use this as the current plan context for repair):\n"
            + feedback.truncated_plan_text
        )
    return block


def _issues_block(errors: tuple[ValidationError, ...] | list[ValidationError]) -> str:
    if errors:
        bullets = "\n".join(f"- {error.message}" for error in errors)
        return f"Issues detected by the validator:\n{bullets}"
    return _NO_ISSUES_BLOCK


def build_repair_prompt(
    base_prompt: str,
    original_plan: str,
    errors: list[ValidationError] | tuple[ValidationError, ...],
    feedback: SpinFeedback | None = None,
) -> str:
    """Assemble the repair prompt; byte-deterministic for identical inputs.

    The output marker is stripped from the base prompt and re-appended at
    the very end, so the assembled prompt contains it exactly once.
    """
    sections = [
        _remove_output_marker(base_prompt),
        "=== SPIN Evaluation Feedback ===\n" + _feedback_block(feedback),
        "=== Detected Issues ===\n" + _issues_block(errors),
        "=== Original Plan ===\n" + original_plan,
        _REPAIR_RULES,
        OUTPUT_MARKER,
    ]
    return "\n\n".join(sections)


def run_validation_repair(
    base_prompt: str,
    planner,
    agents: AgentRegistry,
    retry_budget: int = DEFAULT_RETRY_BUDGET,
    feedback: SpinFeedback | None = None,
) -> RepairOutcome:
    """Generate a plan and repair it until it validates or the budget runs out.

    Round r of 0..retry_budget validates the current text; success returns
    immediately, the final round returns a failure outcome, and intermediate
    rounds re-invoke the planner on the repair prompt built from the latest
    invalid plan and its error set.
    """
    if retry_budget < 0:
        raise ValueError(f"retry_budget must be >= 0, got {retry_budget}")

    attempts = 0
    reports: list[ValidationReport] = []
    try:
        record = planner.complete(base_prompt, key="planner")
    except (TransportError, ScriptExhaustedError) as exc:
        raise RepairLoopAborted(f"planner failed on initial generation: {exc}", attempts) from exc
    plan_text = record.completion
    attempts = 1

    for round_number in range(retry_budget + 1):
        report = validate_plan_text(plan_text, agents)
        reports.append(report)
        if report.is_valid:
            return RepairOutcome(
                valid=True,
                plan_text=plan_text,
                last_errors=(),
                attempts=attempts,
                reports=reports,
            )
        if round_number == retry_budget:
            return RepairOutcome(
                valid=False,
                plan_text=None,
                last_errors=report.errors,
                attempts=attempts,
                reports=reports,
            )
        prompt = build_repair_prompt(base_prompt, plan_text, report.errors, feedback)
        try:
            record = planner.complete(prompt, key="planner")
        except (TransportError, ScriptExhaustedError) as exc:
            raise RepairLoopAborted(
                f"planner failed on repair round {round_number}: {exc}", attempts
            ) from exc
        plan_text = record.completion
        attempts += 1

    raise AssertionError("unreachable: loop always returns")
