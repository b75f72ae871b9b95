"""Candidate-answer evaluation: strict three-key judgments with safe defaults.

The critic receives a user question, the plan prefix considered so far, and
a candidate answer, and must return a single JSON object with exactly the
keys ``status``, ``can_answer_now``, and ``rationale``. Models disobey, so
parsing is total: strict JSON first, then a first-``{``-to-last-``}``
extraction, then sanitization, and finally a safe default that never stops
execution on garbage.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Mapping, Sequence


class CompletionStatus(Enum):
    ACCOMPLISHED = "Accomplished"
    PARTIALLY_ACCOMPLISHED = "Partially accomplished"
    NOT_ACCOMPLISHED = "Not accomplished"


_STATUS_ALIASES = {
    "accomplished": CompletionStatus.ACCOMPLISHED,
    "partiallyaccomplished": CompletionStatus.PARTIALLY_ACCOMPLISHED,
    "notaccomplished": CompletionStatus.NOT_ACCOMPLISHED,
}


def parse_status(value: object) -> CompletionStatus | None:
    """Canonicalize a status spelling, ignoring case, spaces, and underscores.

    Returns None for anything outside the three spelling families.
    """
    if isinstance(value, CompletionStatus):
        return value
    if not isinstance(value, str):
        return None
    key = re.sub(r"[\s_\-]+", "", value).lower()
    return _STATUS_ALIASES.get(key)


@dataclass(frozen=True)
class CriticJudgment:
    status: CompletionStatus
    can_answer_now: bool
    rationale: str
    tokens_in: int = 0
    tokens_out: int = 0
    parse_recovered: bool = True

    def __post_init__(self) -> None:
        if not self.rationale:
            raise ValueError("rationale must be nonempty")

    @property
    def success_flag(self) -> bool:
        """Accomplished or Partially accomplished counts as success."""
        return self.status in (
            CompletionStatus.ACCOMPLISHED,
            CompletionStatus.PARTIALLY_ACCOMPLISHED,
        )


@dataclass(frozen=True)
class FewShotExample:
    name: str
    question: str
    prefix_lines: tuple[str, ...]
    candidate_answer: str
    expected_json: str


_FEWSHOT_RATIONALE = (
    "The trajectory finished and its final answer addresses the question."
)

_DEFAULT_RATIONALE = "No rationale provided by the critic."


def load_trajectories(path: str) -> list[dict]:
    """Load a trajectory corpus file: a JSON array of objects with fields
    ``text`` (the question) and ``execution_steps`` ({agent, action, argument})."""
    with open(path, "r", encoding="utf-8") as handle:
        data = json.load(handle)
    if not isinstance(data, list):
        raise ValueError(f"trajectory corpus {path} must be a JSON array")
    return data


def trajectory_blobs(trajectories: Sequence[Mapping]) -> list[str]:
    """Render trajectory objects as JSON blobs for few-shot prompting."""
    return [json.dumps(dict(trajectory), indent=2) for trajectory in trajectories]


def build_fewshot_examples(
    trajectories: Sequence[Mapping],
) -> tuple[list[FewShotExample], int]:
    """Turn logged trajectories into labeled evaluation examples.

    The question is the trajectory ``text``; the prefix renders every
    non-Finish execution step as ``Agent -> action(args)``; the candidate
    answer is the Finish step's argument. Trajectories without a Finish
    step or without question/answer strings are skipped silently; the skip
    tally is returned alongside the examples. Every retained example is
    labeled Accomplished with can_answer_now true.
    """
    examples: list[FewShotExample] = []
    skipped = 0
    for position, trajectory in enumerate(trajectories, start=1):
        question = str(trajectory.get("text") or "").strip()
        steps = trajectory.get("execution_steps") or []
        finish = next(
            (step for step in steps if step.get("action") == "Finish"), None
        )
        answer = str((finish or {}).get("argument") or "").strip()
        if not question or finish is None or not answer:
            skipped += 1
            continue
        prefix_lines = tuple(
            f"{step.get('agent', '')} -> {step.get('action', '')}({step.get('argument', '')})"
            for step in steps
            if step.get("action") != "Finish"
        )
        name = str(trajectory.get("name") or trajectory.get("id") or f"Trajectory {position}")
        expected_json = json.dumps(
            {
                "status": CompletionStatus.ACCOMPLISHED.value,
                "can_answer_now": True,
                "rationale": _FEWSHOT_RATIONALE,
            },
            separators=(",", ":"),
        )
        examples.append(
            FewShotExample(
                name=name,
                question=question,
                prefix_lines=prefix_lines,
                candidate_answer=answer,
                expected_json=expected_json,
            )
        )
    return examples, skipped


def format_prefix_line(element: str | Mapping) -> str:
    """Render one prefix element on a single line.

    Strings pass through verbatim; mapping records render their present
    fields in the fixed order agent, task, dependency, expected_output.
    """
    if isinstance(element, str):
        return element
    parts = []
    for key, label in (
        ("agent", "Agent"),
        ("task", "Task"),
        ("dependency", "Dependency"),
        ("expected_output", "ExpectedOutput"),
    ):
        if key in element and element[key] is not None:
            parts.append(f"{label}: {element[key]}")
    return " | ".join(parts)


CRITIC_SYSTEM_PROMPT = """You are a CRITIC AGENT for DAG-based multi-agent workflows.

Your job:
- You receive a user question, a DAG prefix (steps that have been planned
  or executed so far), and a candidate answer produced by another agent.
- You must judge how well the candidate answer responds to the user question,
  given the DAG prefix.

Your decision must follow this schema (JSON, single top-level object):

{
  "status": "Accomplished" | "Partially accomplished" | "Not accomplished",
  "can_answer_now": true | false,
  "rationale": "short natural-language explanation"
}

Semantics:
- "Accomplished": the answer is essentially correct and complete for the question.
- "Partially accomplished": the answer is on-topic but clearly incomplete or missing
  some important details.
- "Not accomplished": the answer is incorrect, off-topic, or fundamentally misaligned.

IMPORTANT:
- You MUST output valid JSON only.
- Do NOT wrap the JSON in markdown, backticks, or any extra text.
- Do NOT add extra fields."""

_CRITIC_INSTRUCTION = (
    "=== Instruction ===\n"
    "Now, based on the evaluation examples above, decide the status, "
    "can_answer_now, and rationale for THIS new case. Output ONLY a single "
    'JSON object with keys "status", "can_answer_now", and "rationale".'
)


def build_critic_prompt(
    question: str,
    prefix_lines: Sequence[str | Mapping],
    candidate_answer: str,
    examples: Sequence[FewShotExample],
    scenario_context: Mapping | None = None,
) -> str:
    """Assemble the critic prompt; byte-deterministic for identical inputs."""
    fewshot_blocks = ["=== Few-shot evaluation examples ==="]
    for number, example in enumerate(examples, start=1):
        lines = [
            f"Example {number}: {example.name}",
            f"User question: {example.question}",
            "DAG prefix:",
        ]
        lines.extend(f"  - {line}" for line in example.prefix_lines)
        lines.append(f"Candidate answer: {example.candidate_answer}")
        lines.append("Expected evaluation JSON:")
        lines.append(example.expected_json)
        fewshot_blocks.append("\n".join(lines))

    new_case = [
        "=== New case to evaluate ===",
        f"User question: {question}",
        "DAG prefix:",
    ]
    new_case.extend(f"  - {format_prefix_line(element)}" for element in prefix_lines)
    new_case.append(f"Candidate answer: {candidate_answer}")

    sections = [
        CRITIC_SYSTEM_PROMPT,
        "\n\n".join(fewshot_blocks),
        "\n".join(new_case),
    ]
    if scenario_context is not None:
        sections.append(
            "=== Scenario context ===\n"
            + json.dumps(dict(scenario_context), sort_keys=True)
        )
    sections.append(_CRITIC_INSTRUCTION)
    return "\n\n".join(sections)


def _coerce_bool(value: object) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, str):
        return value.strip().lower() in {"true", "yes", "1"}
    if isinstance(value, (int, float)):
        return bool(value)
    return False


def _safe_default(raw: str) -> CriticJudgment:
    detail = raw.strip() or "<empty output>"
    return CriticJudgment(
        status=CompletionStatus.NOT_ACCOMPLISHED,
        can_answer_now=False,
        rationale=f"Failed to parse JSON from model output: {detail}",
        parse_recovered=False,
    )


def parse_critic_output(raw: str) -> CriticJudgment:
    """Parse raw model output into a judgment; total over all inputs.

    Strict JSON is tried first, then the substring between the first ``{``
    and the last ``}``. Status spellings are canonicalized and
    can_answer_now is coerced to a boolean; anything unrecoverable yields
    the safe default (Not accomplished, can_answer_now false) with
    ``parse_recovered`` false.
    """
    parsed: object = None
    try:
        parsed = json.loads(raw)
    except (json.JSONDecodeError, TypeError):
        start, end = raw.find("{"), raw.rfind("}")
        if start != -1 and end > start:
            try:
                parsed = json.loads(raw[start : end + 1])
            except json.JSONDecodeError:
                parsed = None

    if not isinstance(parsed, dict):
        return _safe_default(raw)
    status = parse_status(parsed.get("status"))
    if status is None:
        return _safe_default(raw)
    rationale = str(parsed.get("rationale") or "").strip() or _DEFAULT_RATIONALE
    return CriticJudgment(
        status=status,
        can_answer_now=_coerce_bool(parsed.get("can_answer_now")),
        rationale=rationale,
        parse_recovered=True,
    )


def evaluate(
    question: str,
    candidate_answer: str,
    prefix_lines: Sequence[str | Mapping],
    examples: Sequence[FewShotExample],
    llm,
    scenario_context: Mapping | None = None,
) -> CriticJudgment:
    """One completion call: build the prompt, parse the output, attach tokens."""
    prompt = build_critic_prompt(
        question, prefix_lines, candidate_answer, examples, scenario_context
    )
    record = llm.complete(prompt, key="critic")
    judgment = parse_critic_output(record.completion)
    return replace(judgment, tokens_in=record.tokens_in, tokens_out=record.tokens_out)


@dataclass
class CriticAgent:
    """Binds a completion port and a fixed few-shot example set."""

    llm: object
    examples: tuple[FewShotExample, ...] = field(default_factory=tuple)

    def evaluate(
        self,
        question: str,
        candidate_answer: str,
        prefix_lines: Sequence[str | Mapping],
        scenario_context: Mapping | None = None,
    ) -> CriticJudgment:
        return evaluate(
            question,
            candidate_answer,
            prefix_lines,
            self.examples,
            self.llm,
            scenario_context,
        )
