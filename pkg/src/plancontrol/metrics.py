"""Effort and outcome accounting for runs: per-run ledgers and aggregation.

A ledger counts the external execution effort of one run (executed tasks,
tool calls, API calls, tokens, elapsed time) plus the internal prompting
overhead spent on simulation and critique, tracked separately because the
two move in opposite directions under prefix stopping. Aggregation computes
per-run outcome rates first, then means and standard deviations across runs.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np


class TaskOutcome(Enum):
    ACCOMPLISHED = "Accomplished"
    NOT_ACCOMPLISHED = "NotAccomplished"
    ERROR = "Error"


@dataclass
class RunLedger:
    run_id: str
    tag: str = ""
    executed_tasks: int = 0
    tool_calls: int = 0
    api_calls: int = 0
    tokens_sent: int = 0
    tokens_received: int = 0
    overhead_tokens_sent: int = 0
    overhead_tokens_received: int = 0
    elapsed: float = 0.0
    task_outcomes: list[TaskOutcome] = field(default_factory=list)

    def record_task(
        self,
        outcome: TaskOutcome,
        *,
        tool_calls: int = 0,
        api_calls: int = 0,
        tokens_in: int = 0,
        tokens_out: int = 0,
        elapsed: float = 0.0,
    ) -> None:
        self.executed_tasks += 1
        self.tool_calls += tool_calls
        self.api_calls += api_calls
        self.tokens_sent += tokens_in
        self.tokens_received += tokens_out
        self.elapsed += elapsed
        self.task_outcomes.append(outcome)

    def add_overhead(self, tokens_in: int, tokens_out: int) -> None:
        """Simulator/critic prompting effort; included in the token totals."""
        self.overhead_tokens_sent += tokens_in
        self.overhead_tokens_received += tokens_out
        self.tokens_sent += tokens_in
        self.tokens_received += tokens_out

    def outcome_count(self, outcome: TaskOutcome) -> int:
        return sum(1 for entry in self.task_outcomes if entry == outcome)

    def to_dict(self) -> dict:
        data = asdict(self)
        data["task_outcomes"] = [outcome.value for outcome in self.task_outcomes]
        return data

    @classmethod
    def from_dict(cls, data: Mapping) -> "RunLedger":
        outcomes = [TaskOutcome(value) for value in data.get("task_outcomes", [])]
        return cls(
            run_id=str(data["run_id"]),
            tag=str(data.get("tag", "")),
            executed_tasks=int(data.get("executed_tasks", 0)),
            tool_calls=int(data.get("tool_calls", 0)),
            api_calls=int(data.get("api_calls", 0)),
            tokens_sent=int(data.get("tokens_sent", 0)),
            tokens_received=int(data.get("tokens_received", 0)),
            overhead_tokens_sent=int(data.get("overhead_tokens_sent", 0)),
            overhead_tokens_received=int(data.get("overhead_tokens_received", 0)),
            elapsed=float(data.get("elapsed", 0.0)),
            task_outcomes=outcomes,
        )


def write_ledger(ledger: RunLedger, path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(json.dumps(ledger.to_dict(), sort_keys=True) + "\n")


def load_ledgers(path: str) -> list[RunLedger]:
    """Read line-delimited run records from one file."""
    ledgers: list[RunLedger] = []
    with open(path, "r", encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                ledgers.append(RunLedger.from_dict(json.loads(text)))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise ValueError(f"malformed ledger at {path}:{line_number}: {exc}") from exc
    return ledgers


@dataclass(frozen=True)
class MeanStd:
    mean: float
    std: float

    @classmethod
    def of(cls, values: Sequence[float], population: bool = True) -> "MeanStd":
        array = np.asarray(values, dtype=float)
        ddof = 0 if population else 1
        if array.size <= ddof:
            return cls(mean=float(array.mean()) if array.size else 0.0, std=0.0)
        return cls(mean=float(array.mean()), std=float(array.std(ddof=ddof)))

    def render(self, mean_format: str = "{:.2f}") -> str:
        return f"{mean_format.format(self.mean)} ({self.std:.3f})"


@dataclass(frozen=True)
class AggregateReport:
    runs: int
    excluded_runs: int
    tasks: int
    acc_rate: MeanStd
    not_rate: MeanStd
    error_rate: MeanStd
    avg_tasks: MeanStd
    tool_calls: MeanStd
    api_calls: MeanStd
    tokens_sent: MeanStd
    tokens_received: MeanStd
    overhead_tokens_sent: MeanStd
    overhead_tokens_received: MeanStd
    elapsed: MeanStd

    def to_dict(self) -> dict:
        return asdict(self)


def _run_rate(ledger: RunLedger, outcome: TaskOutcome) -> float:
    if ledger.executed_tasks == 0:
        return 0.0
    return ledger.outcome_count(outcome) / ledger.executed_tasks


def aggregate(
    ledgers: Sequence[RunLedger],
    *,
    nonzero_only: bool = False,
    population_std: bool = True,
) -> AggregateReport:
    """Aggregate run ledgers: rates per run first, then mean/std across runs.

    With ``nonzero_only`` set, runs that executed no tasks are excluded and
    counted in ``excluded_runs``. Raises on an empty ledger list or when the
    filter excludes everything.
    """
    if not ledgers:
        raise ValueError("cannot aggregate an empty ledger list")
    included = (
        [ledger for ledger in ledgers if ledger.executed_tasks > 0]
        if nonzero_only
        else list(ledgers)
    )
    if not included:
        raise ValueError("all runs were excluded by the non-zero-task filter")

    def stat(values: Iterable[float]) -> MeanStd:
        return MeanStd.of(list(values), population=population_std)

    return AggregateReport(
        runs=len(included),
        excluded_runs=len(ledgers) - len(included),
        tasks=sum(ledger.executed_tasks for ledger in included),
        acc_rate=stat(_run_rate(l, TaskOutcome.ACCOMPLISHED) for l in included),
        not_rate=stat(_run_rate(l, TaskOutcome.NOT_ACCOMPLISHED) for l in included),
        error_rate=stat(_run_rate(l, TaskOutcome.ERROR) for l in included),
        avg_tasks=stat(float(l.executed_tasks) for l in included),
        tool_calls=stat(float(l.tool_calls) for l in included),
        api_calls=stat(float(l.api_calls) for l in included),
        tokens_sent=stat(float(l.tokens_sent) for l in included),
        tokens_received=stat(float(l.tokens_received) for l in included),
        overhead_tokens_sent=stat(float(l.overhead_tokens_sent) for l in included),
        overhead_tokens_received=stat(float(l.overhead_tokens_received) for l in included),
        elapsed=stat(l.elapsed for l in included),
    )


_OUTCOME_HEADERS = ["Method", "Runs", "Tasks", "Acc", "Not", "Error"]
_EFFORT_HEADERS = [
    "Method",
    "AvgTasks/Run",
    "ToolCalls/Run",
    "ApiCalls/Run",
    "TokSent/Run",
    "TokRecv/Run",
    "OverheadTokSent/Run",
    "OverheadTokRecv/Run",
    "Elapsed(s)/Run",
]


def _pad_table(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    widths = [
        max(len(headers[column]), *(len(row[column]) for row in rows))
        if rows
        else len(headers[column])
        for column in range(len(headers))
    ]
    lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(headers))]
    for row in rows:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)))
    return "\n".join(lines)


def render_reports(reports: Mapping[str, AggregateReport], fmt: str = "table") -> str:
    """Render one table row (or JSON entry) per labeled report."""
    if fmt == "json":
        return json.dumps(
            {label: report.to_dict() for label, report in reports.items()},
            indent=2,
            sort_keys=True,
        )
    if fmt != "table":
        raise ValueError(f"unknown report format {fmt!r}")

    outcome_rows = []
    effort_rows = []
    for label, report in reports.items():
        outcome_rows.append(
            [
                label,
                str(report.runs),
                str(report.tasks),
                report.acc_rate.render("{:.3f}"),
                report.not_rate.render("{:.3f}"),
                report.error_rate.render("{:.3f}"),
            ]
        )
        effort_rows.append(
            [
                label,
                report.avg_tasks.render(),
                report.tool_calls.render(),
                report.api_calls.render(),
                report.tokens_sent.render(),
                report.tokens_received.render(),
                report.overhead_tokens_sent.render(),
                report.overhead_tokens_received.render(),
                report.elapsed.render(),
            ]
        )
    excluded = {
        label: report.excluded_runs
        for label, report in reports.items()
        if report.excluded_runs
    }
    parts = [
        _pad_table(_OUTCOME_HEADERS, outcome_rows),
        "",
        _pad_table(_EFFORT_HEADERS, effort_rows),
    ]
    if excluded:
        notes = ", ".join(f"{label}: {count}" for label, count in excluded.items())
        parts.extend(["", f"Excluded zero-task runs: {notes}"])
    return "\n".join(parts)


def render_report(report: AggregateReport, fmt: str = "table", label: str = "all") -> str:
    """Render a single aggregate report as a table or JSON."""
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=2, sort_keys=True)
    return render_reports({label: report}, fmt=fmt)
