"""Plan-text parsing and the strict executable-DAG validation contract.

The plan-text wire format is four aligned tagged lists, one block per step::

    #Task1: <task description>
    #Agent1: <agent name>
    #Dependency1: None | #S<k> [#S<k> ...]
    #ExpectedOutput1: <expected output>

Validation accumulates every violation it can find instead of stopping at
the first, and its messages are produced from fixed format strings so that
reports are byte-stable for identical inputs (downstream repair prompting
embeds them verbatim).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

from .plan_model import AgentRegistry, Plan, PlanStep, prefix as plan_prefix


class ErrorCode(Enum):
    COUNTS_MISMATCH = "COUNTS_MISMATCH"
    AGENT_UNKNOWN = "AGENT_UNKNOWN"
    TASK_NUMBERS_NOT_SEQ = "TASK_NUMBERS_NOT_SEQ"
    AGENT_NUMBERS_NOT_SEQ = "AGENT_NUMBERS_NOT_SEQ"
    DEPENDENCY_NUMBERS_NOT_SEQ = "DEPENDENCY_NUMBERS_NOT_SEQ"
    EXPECTEDOUTPUT_NUMBERS_NOT_SEQ = "EXPECTEDOUTPUT_NUMBERS_NOT_SEQ"
    MISSING_SECTION = "MISSING_SECTION"
    DEP_BAD_FORMAT = "DEP_BAD_FORMAT"
    DEP_OUT_OF_RANGE = "DEP_OUT_OF_RANGE"
    DEP_FORWARD_REF = "DEP_FORWARD_REF"


@dataclass(frozen=True)
class ValidationError:
    code: ErrorCode
    message: str


@dataclass(frozen=True)
class ValidationReport:
    is_valid: bool
    errors: tuple[ValidationError, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "errors", tuple(self.errors))
        if self.is_valid != (len(self.errors) == 0):
            raise ValueError("is_valid must hold exactly when the error list is empty")

    @property
    def messages(self) -> list[str]:
        return [error.message for error in self.errors]


_FAMILIES = ("Task", "Agent", "Dependency", "ExpectedOutput")

_SEQ_CODES = {
    "Task": ErrorCode.TASK_NUMBERS_NOT_SEQ,
    "Agent": ErrorCode.AGENT_NUMBERS_NOT_SEQ,
    "Dependency": ErrorCode.DEPENDENCY_NUMBERS_NOT_SEQ,
    "ExpectedOutput": ErrorCode.EXPECTEDOUTPUT_NUMBERS_NOT_SEQ,
}

# Anchored at line starts; content is trimmed of surrounding spaces/tabs
# (and a stray carriage return, so CRLF plan files validate identically).
_TAG_LINE = re.compile(
    r"^#(Task|Agent|Dependency|ExpectedOutput)(\d+):[ \t]*(.*?)[ \t\r]*$",
    re.MULTILINE,
)

_DEP_TOKEN = re.compile(r"#S(\d+)")


def parse_plan_text(plan_text: str) -> tuple[Plan | None, list[tuple[str, int, str]]]:
    """Extract all tagged lines and assemble a best-effort plan.

    Returns ``(plan, extractions)`` where ``extractions`` is the list of
    ``(tag, index, content)`` triples in document order. Lines with empty
    content are malformed and simply not extracted; ``plan`` is None unless
    the four lists align into a well-formed plan. This function never fails.
    """
    extractions: list[tuple[str, int, str]] = []
    for match in _TAG_LINE.finditer(plan_text):
        tag, index, content = match.group(1), int(match.group(2)), match.group(3)
        if not content:
            continue
        extractions.append((tag, index, content))
    return _assemble_plan(plan_text, extractions), extractions


def parse_dependency_content(content: str) -> set[int] | None:
    """Parse a dependency field into a set of step indices.

    Accepts ``None`` or ``#S<k>`` tokens separated by whitespace and/or
    commas (serialization always emits whitespace). Returns None when the
    content does not fit that grammar.
    """
    text = content.strip()
    if text == "None":
        return set()
    tokens = [token for token in re.split(r"[\s,]+", text) if token]
    if not tokens:
        return None
    indices: set[int] = set()
    for token in tokens:
        match = _DEP_TOKEN.fullmatch(token)
        if match is None:
            return None
        indices.add(int(match.group(1)))
    return indices


def render_dependencies(dependencies: Iterable[int]) -> str:
    """Render a dependency set as ``None`` or ascending ``#S<k>`` tokens."""
    ordered = sorted(dependencies)
    if not ordered:
        return "None"
    return " ".join(f"#S{index}" for index in ordered)


def _first_by_index(entries: Sequence[tuple[int, str]]) -> dict[int, str]:
    contents: dict[int, str] = {}
    for index, content in entries:
        contents.setdefault(index, content)
    return contents


def _assemble_plan(
    plan_text: str, extractions: Sequence[tuple[str, int, str]]
) -> Plan | None:
    by_family: dict[str, list[tuple[int, str]]] = {family: [] for family in _FAMILIES}
    for tag, index, content in extractions:
        by_family[tag].append((index, content))

    count = len(by_family["Task"])
    if count == 0:
        return None
    expected = list(range(1, count + 1))
    for family in _FAMILIES:
        if [index for index, _ in by_family[family]] != expected:
            return None

    tasks = _first_by_index(by_family["Task"])
    agents = _first_by_index(by_family["Agent"])
    dependencies = _first_by_index(by_family["Dependency"])
    outputs = _first_by_index(by_family["ExpectedOutput"])

    steps: list[PlanStep] = []
    for index in expected:
        deps = parse_dependency_content(dependencies[index])
        if deps is None:
            return None
        try:
            steps.append(
                PlanStep(
                    index=index,
                    task=tasks[index],
                    agent=agents[index],
                    dependencies=frozenset(deps),
                    expected_output=outputs[index],
                )
            )
        except ValueError:
            return None
    return Plan(steps=tuple(steps), source_text=plan_text)


def validate_plan_text(plan_text: str, agents: AgentRegistry) -> ValidationReport:
    """Check plan text against the executable-DAG contract.

    Violations accumulate in a fixed order: section presence, per-family
    index sequences, cross-family counts, dependency syntax, dependency
    range, forward/self references, then agent admissibility; within a
    check, errors are ordered by step index.
    """
    _, extractions = parse_plan_text(plan_text)
    by_family: dict[str, list[tuple[int, str]]] = {family: [] for family in _FAMILIES}
    for tag, index, content in extractions:
        by_family[tag].append((index, content))

    errors: list[ValidationError] = []

    for family in _FAMILIES:
        if not by_family[family]:
            errors.append(
                ValidationError(ErrorCode.MISSING_SECTION, f"{family} lines missing")
            )

    for family in _FAMILIES:
        indices = [index for index, _ in by_family[family]]
        if indices and indices != list(range(1, len(indices) + 1)):
            errors.append(
                ValidationError(
                    _SEQ_CODES[family],
                    f"{family} numbers must be 1..N in order; got {indices}",
                )
            )

    counts = {family: len(by_family[family]) for family in _FAMILIES}
    if len(set(counts.values())) > 1:
        errors.append(
            ValidationError(
                ErrorCode.COUNTS_MISMATCH,
                "Counts of Task/Agent/Dependency/ExpectedOutput must match",
            )
        )

    # The nominal plan length used by range checks; tasks define it when
    # present so that range reports stay meaningful under count mismatches.
    n_steps = counts["Task"] or max(counts.values(), default=0)

    dependency_fields = _first_by_index(by_family["Dependency"])
    parsed: dict[int, set[int]] = {}
    for index in sorted(dependency_fields):
        content = dependency_fields[index]
        deps = parse_dependency_content(content)
        if deps is None:
            errors.append(
                ValidationError(
                    ErrorCode.DEP_BAD_FORMAT,
                    f"Dependency{index} must be 'None' or '#S1 #S2 ...'; got '{content}'",
                )
            )
        else:
            parsed[index] = deps

    for index in sorted(parsed):
        out_of_range = sorted(dep for dep in parsed[index] if not 1 <= dep <= n_steps)
        if out_of_range:
            errors.append(
                ValidationError(
                    ErrorCode.DEP_OUT_OF_RANGE,
                    f"Dependency{index} out of range {out_of_range}; valid 1..{n_steps}",
                )
            )

    for index in sorted(parsed):
        forward = sorted(dep for dep in parsed[index] if dep >= index)
        if forward:
            errors.append(
                ValidationError(
                    ErrorCode.DEP_FORWARD_REF,
                    f"Dependency{index} forward reference {forward}; only past steps allowed",
                )
            )

    agent_fields = _first_by_index(by_family["Agent"])
    for index in sorted(agent_fields):
        name = agent_fields[index]
        if name not in agents:
            errors.append(
                ValidationError(
                    ErrorCode.AGENT_UNKNOWN,
                    f"Agent{index} unknown '{name}'. Allowed: {agents.as_list()}",
                )
            )

    return ValidationReport(is_valid=not errors, errors=tuple(errors))


def _serialize_steps(steps: Iterable[PlanStep]) -> str:
    blocks = []
    for step in steps:
        blocks.append(
            f"#Task{step.index}: {step.task}\n"
            f"#Agent{step.index}: {step.agent}\n"
            f"#Dependency{step.index}: {render_dependencies(step.dependencies)}\n"
            f"#ExpectedOutput{step.index}: {step.expected_output}"
        )
    return "\n\n".join(blocks)


def serialize_plan(plan: Plan) -> str:
    """Emit the four tagged lines per step, blocks separated by blank lines.

    Round-trip law: the output validates cleanly and parses back to an
    equal plan (dependency tokens normalized to ascending, space-separated).
    """
    return _serialize_steps(plan.steps)


def truncate_plan_text(plan: Plan, stop_index: int) -> str:
    """Serialize only the first ``stop_index`` steps, preserving indices."""
    return _serialize_steps(plan_prefix(plan, stop_index).steps)
