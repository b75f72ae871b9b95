"""Command-line surface for batch use: validate, repair, run, simulate,
critic-eval, and report.

Exit codes are stable across commands: 0 success/valid, 1 invalid plan,
2 usage error, 3 port or transport failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .contract import ErrorCode, validate_plan_text
from .critic import CriticAgent
from .engine import PrefixRunError
from .errors import ConfigurationError, ScriptExhaustedError, TransportError
from .gateway import HttpBackend, ScriptedBackend
from .metrics import aggregate, load_ledgers, render_reports, write_ledger
from .plan_model import AgentRegistry
from .repair import DEFAULT_RETRY_BUDGET, RepairLoopAborted
from .scenario import (
    MODES,
    ScenarioError,
    ledger_filename,
    load_scenario,
    plan_from_scenario,
    run_scenario,
)
from .simulator import SimulationError, SimulationRequest, simulate

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_USAGE = 2
EXIT_PORT = 3


class UsageError(Exception):
    pass


def _load_agents(spec: str) -> AgentRegistry:
    """Agent names from a JSON file (array of strings) or a comma list."""
    path = Path(spec)
    if path.is_file():
        try:
            names = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise UsageError(f"agents file {spec} is not valid JSON: {exc}") from exc
        if not isinstance(names, list):
            raise UsageError(f"agents file {spec} must hold a JSON array of names")
        return AgentRegistry(str(name) for name in names)
    return AgentRegistry(part for part in spec.split(","))


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def cmd_validate(args: argparse.Namespace) -> int:
    registry = _load_agents(args.agents)

    if args.plan_dir:
        directory = Path(args.plan_dir)
        if not directory.is_dir():
            raise UsageError(f"{args.plan_dir} is not a directory")
        files = sorted(p for p in directory.iterdir() if p.is_file())
        if not files:
            raise UsageError(f"no plan files found in {args.plan_dir}")
        incidence = {code: 0 for code in ErrorCode}
        ok_plans = 0
        for plan_file in files:
            report = validate_plan_text(
                plan_file.read_text(encoding="utf-8"), registry
            )
            if report.is_valid:
                ok_plans += 1
            for code in {error.code for error in report.errors}:
                incidence[code] += 1
        total = len(files)
        success_rate = ok_plans / total
        if args.format == "json":
            payload = {
                "total_plans": total,
                "ok_plans": ok_plans,
                "success_rate": success_rate,
                "incidence": {code.value: incidence[code] for code in ErrorCode},
            }
            print(json.dumps(payload, indent=2, sort_keys=True))
        else:
            print(f"success_rate: {success_rate:.3f}")
            print(f"ok_plans: {ok_plans}")
            print(f"total_plans: {total}")
            for code in ErrorCode:
                count = incidence[code]
                print(f"{code.value}: {count} ({100.0 * count / total:.1f}%)")
        return EXIT_OK

    if not args.plan:
        raise UsageError("provide --plan FILE or --plan-dir DIR")
    report = validate_plan_text(_read_text(args.plan), registry)
    if args.format == "json":
        payload = {
            "is_valid": report.is_valid,
            "errors": [
                {"code": error.code.value, "message": error.message}
                for error in report.errors
            ],
        }
        print(json.dumps(payload, indent=2))
    else:
        print(f"is_valid: {str(report.is_valid).lower()}")
        for error in report.errors:
            print(f"- {error.message}")
    return EXIT_OK if report.is_valid else EXIT_INVALID


def cmd_repair(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    plan, outcome = plan_from_scenario(scenario, retry_budget=args.retry_budget)
    if plan is None:
        print(f"repair failed after {outcome.attempts} attempts")
        for error in outcome.last_errors:
            print(f"- {error.message}")
        return EXIT_INVALID
    print(f"valid plan after {outcome.attempts} attempt(s)")
    print(outcome.plan_text)
    return EXIT_OK


def _http_backend_or_none(args: argparse.Namespace):
    if getattr(args, "backend", "scripted") == "http":
        return HttpBackend()
    return None


def cmd_run(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    result, outcome = run_scenario(
        scenario,
        args.mode,
        retry_budget=args.retry_budget,
        top_k=args.top_k,
        llm_backend=_http_backend_or_none(args),
    )
    if result is None:
        print(f"plan repair failed after {outcome.attempts} attempts")
        for error in outcome.last_errors:
            print(f"- {error.message}")
        return EXIT_INVALID

    ledger_dir = Path(args.ledger_dir)
    ledger_dir.mkdir(parents=True, exist_ok=True)
    ledger_path = ledger_dir / ledger_filename(scenario.id, args.mode)
    write_ledger(result.ledger, str(ledger_path))

    print(f"mode: {args.mode}")
    print(f"k_star: {result.k_star}")
    print(f"executed_tasks: {result.ledger.executed_tasks}")
    print(f"ledger: {ledger_path}")
    print("answer:")
    print(result.answer)
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    plan, outcome = plan_from_scenario(scenario, retry_budget=args.retry_budget)
    if plan is None:
        print(f"plan repair failed after {outcome.attempts} attempts")
        return EXIT_INVALID
    if not 1 <= args.k <= len(plan.steps):
        raise UsageError(f"--k {args.k} out of range 1..{len(plan.steps)}")
    step = plan.steps[args.k - 1]

    llm = _http_backend_or_none(args) or ScriptedBackend(
        script=scenario.scripted_simulator or [], backend_id="simulator"
    )
    prior = [f"{s.agent}: {s.task}" for s in plan.steps[: args.k - 1]]
    request = SimulationRequest(
        user_question=scenario.question,
        task_description=step.task,
        agent_name=step.agent,
        dag_prefix=tuple(prior) if prior else None,
    )
    result = simulate(request, None, None, llm, top_k=args.top_k)
    print(f"tokens_in: {result.tokens_in}")
    print(f"tokens_out: {result.tokens_out}")
    print("predicted_output:")
    print(result.predicted_output)
    return EXIT_OK


def cmd_critic_eval(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    plan, outcome = plan_from_scenario(scenario, retry_budget=args.retry_budget)
    if plan is None:
        print(f"plan repair failed after {outcome.attempts} attempts")
        return EXIT_INVALID
    if not 1 <= args.k <= len(plan.steps):
        raise UsageError(f"--k {args.k} out of range 1..{len(plan.steps)}")

    candidate = args.candidate
    if candidate is None:
        entries = scenario.scripted_simulator or []
        if len(entries) >= args.k:
            entry = entries[args.k - 1]
            candidate = entry if isinstance(entry, str) else str(entry.get("text", ""))
        else:
            candidate = ""

    llm = _http_backend_or_none(args) or ScriptedBackend(
        script=scenario.scripted_critic or [], backend_id="critic"
    )
    critic = CriticAgent(llm=llm)
    prefix_lines = [f"{s.agent}: {s.task}" for s in plan.steps[: args.k]]
    judgment = critic.evaluate(scenario.question, candidate, prefix_lines)
    print(
        json.dumps(
            {
                "status": judgment.status.value,
                "can_answer_now": judgment.can_answer_now,
                "rationale": judgment.rationale,
                "tokens_in": judgment.tokens_in,
                "tokens_out": judgment.tokens_out,
                "parse_recovered": judgment.parse_recovered,
            },
            indent=2,
        )
    )
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    directory = Path(args.ledger_dir)
    if not directory.is_dir():
        raise UsageError(f"{args.ledger_dir} is not a directory")
    ledgers = []
    for path in sorted(directory.glob("*.jsonl")):
        ledgers.extend(load_ledgers(str(path)))
    if not ledgers:
        raise UsageError(f"no ledgers found in {args.ledger_dir}")

    by_tag: dict[str, list] = {}
    for ledger in ledgers:
        by_tag.setdefault(ledger.tag or "untagged", []).append(ledger)
    reports = {
        tag: aggregate(group, nonzero_only=args.nonzero_only)
        for tag, group in sorted(by_tag.items())
    }
    print(render_reports(reports, fmt=args.format))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plancontrol",
        description="Validate, repair, and execute dependency-aware agent plans.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    validate = subparsers.add_parser("validate", help="validate plan text files")
    validate.add_argument("--plan", help="path to one plan-text file")
    validate.add_argument("--plan-dir", help="directory of plan-text files")
    validate.add_argument(
        "--agents", required=True, help="comma-separated agent names or a JSON file"
    )
    validate.add_argument("--format", choices=("table", "json"), default="table")
    validate.set_defaults(handler=cmd_validate)

    def add_scenario_options(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("--scenario", required=True, help="scenario JSON file")
        sub.add_argument("--retry-budget", type=int, default=DEFAULT_RETRY_BUDGET)
        sub.add_argument("--top-k", type=int, default=5)
        sub.add_argument(
            "--backend",
            choices=("scripted", "http"),
            default="scripted",
            help="http uses PLANCONTROL_LLM_URL / PLANCONTROL_LLM_TOKEN",
        )

    repair = subparsers.add_parser("repair", help="run the validation/repair loop")
    add_scenario_options(repair)
    repair.set_defaults(handler=cmd_repair)

    run = subparsers.add_parser("run", help="execute a scenario under one mode")
    add_scenario_options(run)
    run.add_argument("--mode", choices=MODES, required=True)
    run.add_argument("--ledger-dir", default="ledgers")
    run.add_argument("--format", choices=("table", "json"), default="table")
    run.set_defaults(handler=cmd_run)

    simulate = subparsers.add_parser("simulate", help="predict one target task output")
    add_scenario_options(simulate)
    simulate.add_argument("--k", type=int, default=1, help="target step index")
    simulate.set_defaults(handler=cmd_simulate)

    critic_eval = subparsers.add_parser(
        "critic-eval", help="judge a candidate answer at one prefix"
    )
    add_scenario_options(critic_eval)
    critic_eval.add_argument("--k", type=int, default=1, help="prefix length")
    critic_eval.add_argument("--candidate", help="candidate answer text")
    critic_eval.set_defaults(handler=cmd_critic_eval)

    report = subparsers.add_parser("report", help="aggregate ledgers into tables")
    report.add_argument("--ledger-dir", required=True)
    report.add_argument("--format", choices=("table", "json"), default="table")
    report.add_argument("--nonzero-only", action="store_true")
    report.set_defaults(handler=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.handler(args)
    except (UsageError, ScenarioError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (
        TransportError,
        ScriptExhaustedError,
        ConfigurationError,
        SimulationError,
        PrefixRunError,
        RepairLoopAborted,
    ) as exc:
        print(f"port failure: {exc}", file=sys.stderr)
        return EXIT_PORT


if __name__ == "__main__":
    sys.exit(main())
