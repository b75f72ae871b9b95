"""Scenario files: the unit of reproducible batch runs.

A scenario pins a question, a base planning prompt, the admissible agents,
and scripts for every port (planner, executor, simulator, critic), so that
each branch of the validation/repair and prefix-stopping loops can be
replayed deterministically without a live endpoint.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping

from .critic import CriticAgent
from .embedding import HashingEmbedder
from .engine import (
    PrefixRunResult,
    StepExecution,
    run_baseline,
    run_prefix_evaluation,
)
from .gateway import ScriptedBackend
from .plan_model import AgentRegistry, Plan, PlanStep
from .repair import DEFAULT_RETRY_BUDGET, RepairOutcome, run_validation_repair
from .simulator import SimulatorAgent, SimulatorConfig
from .store import TrajectoryStore
from .contract import parse_plan_text

MODES = ("base", "spin", "spin_wo_sim", "spin_wo_cri")


class ScenarioError(ValueError):
    """The scenario file is missing required fields or is not valid JSON."""


@dataclass
class Scenario:
    id: str
    question: str
    base_prompt: str
    agents_allowed: list[str]
    scripted_planner: list[object]
    scripted_executor: dict[int, object] = field(default_factory=dict)
    scripted_simulator: list[object] | None = None
    scripted_critic: list[object] | None = None

    def registry(self) -> AgentRegistry:
        return AgentRegistry(self.agents_allowed)


def load_scenario(path: str) -> Scenario:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            data = json.load(handle)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ScenarioError(f"scenario {path} must be a JSON object")

    missing = [
        key
        for key in ("id", "question", "base_prompt", "agents_allowed", "scripted_planner")
        if key not in data
    ]
    if missing:
        raise ScenarioError(f"scenario {path} missing fields: {missing}")
    agents = data["agents_allowed"]
    if not isinstance(agents, list) or not agents:
        raise ScenarioError(f"scenario {path}: agents_allowed must be a nonempty list")
    planner = data["scripted_planner"]
    if not isinstance(planner, list) or not planner:
        raise ScenarioError(f"scenario {path}: scripted_planner must be a nonempty list")

    executor_raw = data.get("scripted_executor") or {}
    try:
        executor = {int(key): value for key, value in executor_raw.items()}
    except (TypeError, ValueError) as exc:
        raise ScenarioError(
            f"scenario {path}: scripted_executor keys must be step indices"
        ) from exc

    return Scenario(
        id=str(data["id"]),
        question=str(data["question"]),
        base_prompt=str(data["base_prompt"]),
        agents_allowed=[str(name) for name in agents],
        scripted_planner=list(planner),
        scripted_executor=executor,
        scripted_simulator=data.get("scripted_simulator"),
        scripted_critic=data.get("scripted_critic"),
    )


class ScriptedExecutor:
    """Executor port replaying per-step scripted observations.

    Entries may be observation strings (defaults: one tool call, one API
    call) or dicts with observation/tool_calls/api_calls/tokens_in/
    tokens_out/elapsed/error fields. A step with no entry produces a
    recorded per-step error, not an exception.
    """

    def __init__(self, script: Mapping[int, object]):
        self._script = dict(script)

    def execute(self, step: PlanStep, context: Mapping[int, str]) -> StepExecution:
        del context
        entry = self._script.get(step.index)
        if entry is None:
            return StepExecution(
                observation="",
                error=f"no scripted observation for step {step.index}",
            )
        if isinstance(entry, str):
            return StepExecution(observation=entry, tool_calls=1, api_calls=1)
        if isinstance(entry, Mapping):
            return StepExecution(
                observation=str(entry.get("observation", "")),
                tool_calls=int(entry.get("tool_calls", 1)),
                api_calls=int(entry.get("api_calls", 1)),
                tokens_in=int(entry.get("tokens_in", 0)),
                tokens_out=int(entry.get("tokens_out", 0)),
                elapsed=float(entry.get("elapsed", 0.0)),
                error=entry.get("error"),
            )
        return StepExecution(
            observation="",
            error=f"unsupported executor script entry for step {step.index}",
        )


def plan_from_scenario(
    scenario: Scenario, retry_budget: int = DEFAULT_RETRY_BUDGET
) -> tuple[Plan | None, RepairOutcome]:
    """Run the scripted planner through the validation/repair loop."""
    planner = ScriptedBackend(script=scenario.scripted_planner, backend_id="planner")
    outcome = run_validation_repair(
        scenario.base_prompt, planner, scenario.registry(), retry_budget
    )
    if not outcome.valid:
        return None, outcome
    plan, _ = parse_plan_text(outcome.plan_text)
    return plan, outcome


def run_scenario(
    scenario: Scenario,
    mode: str,
    *,
    retry_budget: int = DEFAULT_RETRY_BUDGET,
    top_k: int = 5,
    llm_backend=None,
    store: TrajectoryStore | None = None,
    embedder: HashingEmbedder | None = None,
) -> tuple[PrefixRunResult | None, RepairOutcome]:
    """Plan, validate/repair, then execute the scenario under one mode.

    Returns (result, repair_outcome); result is None when the repair loop
    exhausted its budget. ``llm_backend`` overrides the scripted simulator
    and critic ports (e.g. with an HTTP backend) when given.
    """
    if mode not in MODES:
        raise ScenarioError(f"unknown mode {mode!r}; expected one of {MODES}")
    plan, outcome = plan_from_scenario(scenario, retry_budget)
    if plan is None:
        return None, outcome

    executor = ScriptedExecutor(scenario.scripted_executor)
    run_id = f"{scenario.id}:{mode}"

    if mode == "base":
        result = run_baseline(plan, scenario.question, executor, run_id=run_id)
    else:
        simulate_enabled = mode != "spin_wo_sim"
        critic_enabled = mode != "spin_wo_cri"
        simulator = None
        if simulate_enabled:
            sim_llm = llm_backend or ScriptedBackend(
                script=scenario.scripted_simulator or [], backend_id="simulator"
            )
            simulator = SimulatorAgent(
                llm=sim_llm,
                store=store,
                embedder=embedder,
                config=SimulatorConfig(top_k=top_k),
            )
        critic = None
        if critic_enabled:
            critic_llm = llm_backend or ScriptedBackend(
                script=scenario.scripted_critic or [], backend_id="critic"
            )
            critic = CriticAgent(llm=critic_llm)
        result = run_prefix_evaluation(
            plan,
            scenario.question,
            simulator,
            critic,
            executor,
            simulate_enabled=simulate_enabled,
            critic_enabled=critic_enabled,
            run_id=run_id,
        )

    result.ledger.tag = mode
    return result, outcome


def ledger_filename(scenario_id: str, mode: str) -> str:
    return f"{scenario_id}_{mode}.jsonl"
