"""Prefix evaluation with stopping, and the full-execution baseline.

For k = 1..N the engine forms the k-step prefix, obtains a candidate answer
for step k (from the simulator, or from the executor's raw observation when
simulation is disabled), asks the critic whether the prefix already suffices,
and halts at the earliest sufficient k. Index order is a valid topological
order because dependencies only point backward, so no scheduler is needed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Protocol, Sequence

from .contract import render_dependencies
from .critic import CompletionStatus, CriticJudgment, format_prefix_line
from .errors import ScriptExhaustedError, TransportError
from .metrics import RunLedger, TaskOutcome
from .plan_model import Plan, PlanStep
from .simulator import SimulationError


@dataclass(frozen=True)
class StopDecision:
    k: int
    judgment: CriticJudgment
    stopped: bool


@dataclass(frozen=True)
class PrefixRunResult:
    answer: str
    k_star: int
    decisions: tuple[StopDecision, ...]
    ledger: RunLedger


@dataclass(frozen=True)
class StepExecution:
    """What one executor invocation produced and cost."""

    observation: str
    tool_calls: int = 0
    api_calls: int = 0
    tokens_in: int = 0
    tokens_out: int = 0
    elapsed: float = 0.0
    error: str | None = None


class ExecutorPort(Protocol):
    def execute(self, step: PlanStep, context: Mapping[int, str]) -> StepExecution: ...


class PrefixRunError(RuntimeError):
    """A port failed mid-run; the partial ledger and decisions are attached."""

    def __init__(self, message: str, ledger: RunLedger, decisions: Sequence[StopDecision]):
        super().__init__(message)
        self.ledger = ledger
        self.decisions = tuple(decisions)


def should_stop(judgment: CriticJudgment) -> bool:
    """Stop iff the critic can answer now and the status is at least partial."""
    return bool(judgment.can_answer_now) and judgment.status in (
        CompletionStatus.ACCOMPLISHED,
        CompletionStatus.PARTIALLY_ACCOMPLISHED,
    )


_DISABLED_CRITIC_JUDGMENT = CriticJudgment(
    status=CompletionStatus.NOT_ACCOMPLISHED,
    can_answer_now=False,
    rationale="Critic stopping is disabled for this run.",
)


def _step_line(step: PlanStep, observation: str | None = None) -> str:
    line = format_prefix_line(
        {
            "agent": step.agent,
            "task": step.task,
            "dependency": render_dependencies(step.dependencies),
            "expected_output": step.expected_output,
        }
    )
    if observation:
        line += f" | Observation: {observation}"
    return line


def _record_execution(ledger: RunLedger, result: StepExecution) -> None:
    outcome = TaskOutcome.ERROR if result.error else TaskOutcome.ACCOMPLISHED
    ledger.record_task(
        outcome,
        tool_calls=result.tool_calls,
        api_calls=result.api_calls,
        tokens_in=result.tokens_in,
        tokens_out=result.tokens_out,
        elapsed=result.elapsed,
    )


def run_prefix_evaluation(
    plan: Plan,
    query: str,
    simulator=None,
    critic=None,
    executor: ExecutorPort | None = None,
    *,
    simulate_enabled: bool = True,
    critic_enabled: bool = True,
    run_id: str = "run",
    scenario_context: Mapping | None = None,
) -> PrefixRunResult:
    """Evaluate prefixes k = 1..N and stop at the earliest sufficient one.

    When an executor is wired, step k runs before its evaluation and its
    observation feeds the prefix context (and stands in for the simulated
    candidate when simulation is disabled). No simulator or critic call
    happens past the stopping index. Port failures raise PrefixRunError
    carrying the partial ledger.
    """
    ledger = RunLedger(run_id=run_id)
    decisions: list[StopDecision] = []
    observations: dict[int, str] = {}
    steps = plan.steps
    answer = ""
    k_star = len(steps)

    for k in range(1, len(steps) + 1):
        step = steps[k - 1]
        if executor is not None:
            try:
                result = executor.execute(step, dict(observations))
            except Exception as exc:
                raise PrefixRunError(
                    f"executor failed on step {step.index}: {exc}", ledger, decisions
                ) from exc
            _record_execution(ledger, result)
            observations[step.index] = result.observation

        if simulate_enabled and simulator is not None:
            prior_lines = [
                _step_line(s, observations.get(s.index)) for s in steps[: k - 1]
            ]
            try:
                simulation = simulator.run(
                    query,
                    step.task,
                    step.agent,
                    dag_prefix=prior_lines or None,
                )
            except (TransportError, ScriptExhaustedError, SimulationError) as exc:
                raise PrefixRunError(
                    f"simulator failed at prefix {k}: {exc}", ledger, decisions
                ) from exc
            ledger.add_overhead(simulation.tokens_in, simulation.tokens_out)
            candidate = simulation.predicted_output
        else:
            candidate = observations.get(step.index, "")

        if critic_enabled and critic is not None:
            prefix_lines = [_step_line(s, observations.get(s.index)) for s in steps[:k]]
            try:
                judgment = critic.evaluate(
                    query, candidate, prefix_lines, scenario_context=scenario_context
                )
            except (TransportError, ScriptExhaustedError) as exc:
                raise PrefixRunError(
                    f"critic failed at prefix {k}: {exc}", ledger, decisions
                ) from exc
            ledger.add_overhead(judgment.tokens_in, judgment.tokens_out)
        else:
            judgment = _DISABLED_CRITIC_JUDGMENT

        stopped = should_stop(judgment)
        decisions.append(StopDecision(k=k, judgment=judgment, stopped=stopped))
        answer = candidate
        if stopped:
            k_star = k
            break

    return PrefixRunResult(
        answer=answer, k_star=k_star, decisions=tuple(decisions), ledger=ledger
    )


def run_baseline(
    plan: Plan, query: str, executor: ExecutorPort, *, run_id: str = "run"
) -> PrefixRunResult:
    """Execute every step in index order with no stopping (k_star = N).

    Per-step executor errors are recorded in the ledger and the run carries
    on, so a single bad tool call does not void the whole run's accounting.
    """
    del query  # the baseline consults no evaluator; kept for a uniform call shape
    ledger = RunLedger(run_id=run_id)
    observations: dict[int, str] = {}
    answer = ""
    for step in plan.steps:
        try:
            result = executor.execute(step, dict(observations))
        except Exception as exc:
            result = StepExecution(observation="", error=str(exc))
        _record_execution(ledger, result)
        observations[step.index] = result.observation
        if not result.error:
            answer = result.observation
    return PrefixRunResult(
        answer=answer, k_star=len(plan.steps), decisions=(), ledger=ledger
    )
