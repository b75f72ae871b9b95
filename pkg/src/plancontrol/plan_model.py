"""Core plan data model: steps, dependency sets, prefixes, and the agent registry.

Step indices are 1-based throughout so that in-memory plans line up with the
``#S<k>`` reference grammar used in serialized plan text.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable


@dataclass(frozen=True)
class PlanStep:
    """One node of a dependency-aware plan.

    Dependencies may only point at earlier steps, which makes every plan
    acyclic by construction.
    """

    index: int
    task: str
    agent: str
    dependencies: frozenset[int]
    expected_output: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "dependencies", frozenset(self.dependencies))
        if self.index < 1:
            raise ValueError(f"step index must be >= 1, got {self.index}")
        for dep in self.dependencies:
            if not 1 <= dep < self.index:
                raise ValueError(
                    f"step {self.index} dependency {dep} must reference an earlier step"
                )
        for name, value in (
            ("task", self.task),
            ("agent", self.agent),
            ("expected_output", self.expected_output),
        ):
            if not value or not value.strip():
                raise ValueError(f"step {self.index} {name} must be nonempty")


@dataclass(frozen=True)
class Plan:
    """An ordered collection of steps whose indices are exactly 1..N.

    ``source_text`` keeps the raw text the plan was parsed from; it is
    excluded from equality so that a reserialized plan compares equal to
    its original.
    """

    steps: tuple[PlanStep, ...]
    source_text: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "steps", tuple(self.steps))
        for position, step in enumerate(self.steps, start=1):
            if step.index != position:
                raise ValueError(
                    f"step indices must be 1..N in order; position {position} holds index {step.index}"
                )

    def __len__(self) -> int:
        return len(self.steps)

    def step(self, index: int) -> PlanStep:
        if not 1 <= index <= len(self.steps):
            raise ValueError(f"step index {index} out of range 1..{len(self.steps)}")
        return self.steps[index - 1]


@dataclass(frozen=True)
class PlanPrefix:
    """A view of the first ``length`` steps of a plan (no copying)."""

    plan: Plan
    length: int

    def __post_init__(self) -> None:
        n = len(self.plan.steps)
        if not 1 <= self.length <= n:
            raise ValueError(f"prefix length {self.length} out of range 1..{n}")

    @property
    def steps(self) -> tuple[PlanStep, ...]:
        return self.plan.steps[: self.length]

    def __len__(self) -> int:
        return self.length


class AgentRegistry:
    """Ordered set of admissible agent names.

    Names are trimmed and deduplicated (first occurrence wins); the ordering
    is stable because it is rendered verbatim in validation messages.
    """

    def __init__(self, names: Iterable[str]):
        ordered: list[str] = []
        for name in names:
            trimmed = name.strip()
            if trimmed and trimmed not in ordered:
                ordered.append(trimmed)
        self._names = tuple(ordered)

    @property
    def allowed(self) -> tuple[str, ...]:
        return self._names

    def as_list(self) -> list[str]:
        return list(self._names)

    def __contains__(self, name: str) -> bool:
        return name.strip() in self._names

    def __len__(self) -> int:
        return len(self._names)

    def __repr__(self) -> str:
        return f"AgentRegistry({list(self._names)!r})"


def prefix(plan: Plan, k: int) -> PlanPrefix:
    """Return the prefix view of the first ``k`` steps of ``plan``.

    Raises ValueError naming both ``k`` and N when ``k`` is out of range.
    """
    return PlanPrefix(plan=plan, length=k)


def ready_steps(plan_prefix: PlanPrefix, completed: Iterable[int]) -> list[PlanStep]:
    """Steps in the prefix whose dependencies are all completed and which are
    not themselves completed, in index order."""
    done = set(completed)
    return [
        step
        for step in plan_prefix.steps
        if step.index not in done and step.dependencies <= done
    ]
