"""Plan-contract validation, repair prompting, and prefix-based execution control."""

from .contract import (
    ErrorCode,
    ValidationError,
    ValidationReport,
    parse_plan_text,
    serialize_plan,
    truncate_plan_text,
    validate_plan_text,
)
from .critic import (
    CompletionStatus,
    CriticAgent,
    CriticJudgment,
    FewShotExample,
    build_critic_prompt,
    build_fewshot_examples,
    evaluate,
    format_prefix_line,
    load_trajectories,
    parse_critic_output,
    trajectory_blobs,
)
from .embedding import HashingEmbedder
from .engine import (
    ExecutorPort,
    PrefixRunError,
    PrefixRunResult,
    StepExecution,
    StopDecision,
    run_baseline,
    run_prefix_evaluation,
    should_stop,
)
from .errors import ConfigurationError, ScriptExhaustedError, TransportError
from .gateway import (
    CompletionRecord,
    HttpBackend,
    ScriptedBackend,
    whitespace_token_count,
)
from .metrics import (
    AggregateReport,
    RunLedger,
    TaskOutcome,
    aggregate,
    load_ledgers,
    render_report,
    render_reports,
    write_ledger,
)
from .plan_model import AgentRegistry, Plan, PlanPrefix, PlanStep, prefix, ready_steps
from .repair import (
    OUTPUT_MARKER,
    RepairLoopAborted,
    RepairOutcome,
    SpinFeedback,
    build_repair_prompt,
    run_validation_repair,
)
from .scenario import (
    MODES,
    Scenario,
    ScenarioError,
    ScriptedExecutor,
    load_scenario,
    run_scenario,
)
from .simulator import (
    SimulationError,
    SimulationRequest,
    SimulationResult,
    SimulatorAgent,
    SimulatorConfig,
    build_similarity_query,
    build_simulator_prompt,
    load_store,
    retrieve_context,
    simulate,
)
from .store import RetrievalHit, TaskSummaryRecord, TrajectoryStore, cosine_distance

__version__ = "0.1.0"

__all__ = [
    "AgentRegistry",
    "AggregateReport",
    "CompletionRecord",
    "CompletionStatus",
    "ConfigurationError",
    "CriticAgent",
    "CriticJudgment",
    "ErrorCode",
    "ExecutorPort",
    "FewShotExample",
    "HashingEmbedder",
    "HttpBackend",
    "MODES",
    "OUTPUT_MARKER",
    "Plan",
    "PlanPrefix",
    "PlanStep",
    "PrefixRunError",
    "PrefixRunResult",
    "RepairLoopAborted",
    "RepairOutcome",
    "RetrievalHit",
    "RunLedger",
    "Scenario",
    "ScenarioError",
    "ScriptExhaustedError",
    "ScriptedBackend",
    "ScriptedExecutor",
    "SimulationError",
    "SimulationRequest",
    "SimulationResult",
    "SimulatorAgent",
    "SimulatorConfig",
    "SpinFeedback",
    "StepExecution",
    "StopDecision",
    "TaskOutcome",
    "TaskSummaryRecord",
    "TrajectoryStore",
    "TransportError",
    "ValidationError",
    "ValidationReport",
    "aggregate",
    "build_critic_prompt",
    "build_fewshot_examples",
    "build_repair_prompt",
    "build_similarity_query",
    "build_simulator_prompt",
    "cosine_distance",
    "evaluate",
    "format_prefix_line",
    "load_ledgers",
    "load_scenario",
    "load_store",
    "load_trajectories",
    "parse_critic_output",
    "parse_plan_text",
    "prefix",
    "ready_steps",
    "render_report",
    "render_reports",
    "retrieve_context",
    "run_baseline",
    "run_prefix_evaluation",
    "run_scenario",
    "run_validation_repair",
    "serialize_plan",
    "should_stop",
    "simulate",
    "trajectory_blobs",
    "truncate_plan_text",
    "validate_plan_text",
    "whitespace_token_count",
    "write_ledger",
]
