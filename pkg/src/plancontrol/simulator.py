"""Retrieval-conditioned surrogate that predicts a single target task's output.

Given the user question, an optional prefix of prior steps, and summaries of
similar past tasks, the simulator asks a completion port for the text the
assigned agent would produce. It predicts one task per call and returns the
completion verbatim (trimmed of surrounding whitespace only), with token
accounting passed through from the port.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .critic import CompletionStatus
from .embedding import HashingEmbedder
from .errors import ConfigurationError
from .store import RetrievalHit, TrajectoryStore


class SimulationError(RuntimeError):
    """The port returned an unusable (empty) prediction."""


@dataclass(frozen=True)
class SimulationRequest:
    user_question: str
    task_description: str
    agent_name: str
    dag_prefix: tuple[str, ...] | None = None
    few_shot_trajectories: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.dag_prefix is not None:
            object.__setattr__(self, "dag_prefix", tuple(self.dag_prefix))
        object.__setattr__(
            self, "few_shot_trajectories", tuple(self.few_shot_trajectories)
        )
        for name, value in (
            ("user_question", self.user_question),
            ("task_description", self.task_description),
            ("agent_name", self.agent_name),
        ):
            if not value or not value.strip():
                raise ValueError(f"{name} must be nonempty")


@dataclass(frozen=True)
class SimulationResult:
    predicted_output: str
    tokens_in: int
    tokens_out: int
    hits_used: tuple[RetrievalHit, ...]


@dataclass(frozen=True)
class SimulatorConfig:
    """Knobs for retrieval-conditioned simulation.

    ``store_path`` locates the persisted trajectory store; leaving it unset
    while asking to load one is a configuration error (fail fast rather
    than silently simulating without memory).
    """

    top_k: int = 5
    accomplished_only: bool = True
    dimension: int = 64
    store_path: str | None = None


def load_store(config: SimulatorConfig) -> TrajectoryStore:
    if not config.store_path:
        raise ConfigurationError(
            "trajectory store location is not configured; set SimulatorConfig.store_path"
        )
    return TrajectoryStore.load(config.store_path, dimension=config.dimension)


def build_similarity_query(
    user_question: str, agent_name: str, task_description: str
) -> str:
    """The retrieval query: three labeled fields joined by single newlines."""
    return (
        f"User question: {user_question}\n"
        f"Agent: {agent_name}\n"
        f"Task: {task_description}"
    )


def retrieve_context(
    store: TrajectoryStore,
    embedder: HashingEmbedder,
    request: SimulationRequest,
    k: int = 5,
    accomplished_only: bool = True,
) -> list[RetrievalHit]:
    """Embed the similarity query and fetch same-agent neighbors.

    Only completed historical tasks are used as candidates unless the
    accomplished-only filter is switched off. An empty store (or an empty
    filtered set) yields an empty hit list, never a failure.
    """
    query_text = build_similarity_query(
        request.user_question, request.agent_name, request.task_description
    )
    query_vec = embedder.embed(query_text)
    status = CompletionStatus.ACCOMPLISHED if accomplished_only else None
    return store.nearest_neighbors(
        query_vec, k, agent_name=request.agent_name, status=status
    )


SIMULATOR_SYSTEM_PROMPT = """You are a simulator agent. Given:
- a user question,
- an optional DAG prefix (previous steps),
- a target task (agent + description),
- and a few similar past tasks with their summaries,

you must PREDICT the output that the agent will produce for this target task.
Do NOT explain your reasoning. Respond ONLY with the predicted output."""

_TRAJECTORIES_PREAMBLE = (
    "Below are full ground-truth trajectories in JSON format, including "
    "planning_steps and execution_steps. Use them as exemplars of how an "
    "IoT agent behaves and what its final outputs look like."
)

_SIMULATOR_INSTRUCTION = (
    "=== Instruction ===\n"
    "Using the patterns from the Ground-Truth Trajectories above, the current "
    "User Question, the Target Task, the DAG Prefix (if any), and the Similar "
    "Past Tasks, predict the output that the agent should produce for the "
    "Target Task. Respond ONLY with that output, without explanations or JSON."
)


def build_simulator_prompt(
    request: SimulationRequest, hits: Sequence[RetrievalHit]
) -> str:
    """Assemble the simulator prompt; optional sections are omitted entirely
    (header included) when their inputs are empty."""
    sections = [
        SIMULATOR_SYSTEM_PROMPT,
        f"=== User Question ===\n{request.user_question}",
    ]
    if request.dag_prefix:
        step_lines = "\n".join(
            f"Step {number}: {line}"
            for number, line in enumerate(request.dag_prefix, start=1)
        )
        sections.append(f"=== DAG Prefix (high-level) ===\n{step_lines}")
    if request.few_shot_trajectories:
        blocks = [
            "=== Ground-Truth Trajectories (Few-Shot Examples) ===\n"
            + _TRAJECTORIES_PREAMBLE
        ]
        for number, blob in enumerate(request.few_shot_trajectories, start=1):
            blocks.append(f"--- Ground-Truth Trajectory {number} ---\n{blob}")
        sections.append("\n\n".join(blocks))
    sections.append(
        f"=== Target Task ===\n"
        f"Agent: {request.agent_name}\n"
        f"Task description: {request.task_description}"
    )
    if hits:
        bullets = "\n".join(
            f"- [status={hit.record.status.value}] {hit.record.summary}"
            for hit in hits
        )
        sections.append(f"=== Similar Past Tasks ===\n{bullets}")
    sections.append(_SIMULATOR_INSTRUCTION)
    return "\n\n".join(sections)


def simulate(
    request: SimulationRequest,
    store: TrajectoryStore | None,
    embedder: HashingEmbedder | None,
    llm,
    *,
    top_k: int = 5,
    accomplished_only: bool = True,
) -> SimulationResult:
    """Retrieve, prompt, and complete once.

    An empty completion is an error: downstream evaluation needs a candidate
    answer, and failing loudly localizes the fault to the port.
    """
    hits: list[RetrievalHit] = []
    if store is not None and embedder is not None:
        hits = retrieve_context(
            store, embedder, request, k=top_k, accomplished_only=accomplished_only
        )
    prompt = build_simulator_prompt(request, hits)
    record = llm.complete(prompt, key="simulator")
    predicted = record.completion.strip()
    if not predicted:
        raise SimulationError("simulator port returned an empty prediction")
    return SimulationResult(
        predicted_output=predicted,
        tokens_in=record.tokens_in,
        tokens_out=record.tokens_out,
        hits_used=tuple(hits),
    )


@dataclass
class SimulatorAgent:
    """Binds ports and configuration for repeated single-task predictions."""

    llm: object
    store: TrajectoryStore | None = None
    embedder: HashingEmbedder | None = None
    config: SimulatorConfig = field(default_factory=SimulatorConfig)
    few_shot_trajectories: tuple[str, ...] = field(default_factory=tuple)

    def run(
        self,
        user_question: str,
        task_description: str,
        agent_name: str,
        dag_prefix: Sequence[str] | None = None,
        few_shot_trajectories: Sequence[str] | None = None,
    ) -> SimulationResult:
        request = SimulationRequest(
            user_question=user_question,
            task_description=task_description,
            agent_name=agent_name,
            dag_prefix=tuple(dag_prefix) if dag_prefix else None,
            few_shot_trajectories=tuple(
                few_shot_trajectories
                if few_shot_trajectories is not None
                else self.few_shot_trajectories
            ),
        )
        return simulate(
            request,
            self.store,
            self.embedder,
            self.llm,
            top_k=self.config.top_k,
            accomplished_only=self.config.accomplished_only,
        )
