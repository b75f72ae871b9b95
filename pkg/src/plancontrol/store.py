"""Embedded store of task-summary records with exact vector similarity search.

The store is an exact linear scan, not an approximate index: corpora here
are tens of records, and exactness keeps retrieval testable against a
brute-force oracle. Distances are cosine distances in [0, 2]; ties break by
ascending record id so rankings are fully deterministic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .critic import CompletionStatus, parse_status


@dataclass
class TaskSummaryRecord:
    """A stored trajectory summary: who ran what, how it ended, and its vector."""

    id: str
    agent_name: str
    task_text: str
    status: CompletionStatus
    summary: str
    embedding: np.ndarray

    def __post_init__(self) -> None:
        self.embedding = np.asarray(self.embedding, dtype=float)
        if not self.summary or not self.summary.strip():
            raise ValueError(f"record {self.id!r} summary must be nonempty")

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "agent_name": self.agent_name,
            "task_text": self.task_text,
            "status": self.status.value,
            "summary": self.summary,
            "embedding": [float(value) for value in self.embedding],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TaskSummaryRecord":
        status = parse_status(data.get("status"))
        if status is None:
            raise ValueError(f"record {data.get('id')!r} has unknown status {data.get('status')!r}")
        return cls(
            id=str(data["id"]),
            agent_name=str(data["agent_name"]),
            task_text=str(data["task_text"]),
            status=status,
            summary=str(data["summary"]),
            embedding=np.asarray(data["embedding"], dtype=float),
        )


@dataclass(frozen=True)
class RetrievalHit:
    record: TaskSummaryRecord
    distance: float
    rank: int


def cosine_distance(u: np.ndarray, v: np.ndarray) -> float:
    """1 - cosine similarity, clamped to stay nonnegative; a zero vector is
    treated as orthogonal to everything (distance 1)."""
    norm_u = float(np.linalg.norm(u))
    norm_v = float(np.linalg.norm(v))
    if norm_u == 0.0 or norm_v == 0.0:
        return 1.0
    return max(0.0, 1.0 - float(np.dot(u, v)) / (norm_u * norm_v))


class TrajectoryStore:
    """In-memory record store supporting filtered exact top-k retrieval.

    Concurrency contract: many readers, one writer. Queries snapshot the
    record list at call start, so a concurrent insert never tears a result.
    """

    def __init__(self, dimension: int = 64):
        if dimension < 1:
            raise ValueError(f"dimension must be >= 1, got {dimension}")
        self.dimension = dimension
        self._records: list[TaskSummaryRecord] = []
        self._ids: set[str] = set()

    def __len__(self) -> int:
        return len(self._records)

    @property
    def records(self) -> list[TaskSummaryRecord]:
        return list(self._records)

    def insert(self, record: TaskSummaryRecord) -> None:
        if record.embedding.shape != (self.dimension,):
            raise ValueError(
                f"record {record.id!r} embedding has dimension "
                f"{record.embedding.shape}, store expects ({self.dimension},)"
            )
        if record.id in self._ids:
            raise ValueError(f"duplicate record id {record.id!r}")
        self._records.append(record)
        self._ids.add(record.id)

    def nearest_neighbors(
        self,
        query_vec: np.ndarray,
        k: int,
        *,
        agent_name: str | None = None,
        status: CompletionStatus | None = None,
    ) -> list[RetrievalHit]:
        """Top-k records by increasing cosine distance, filters applied first.

        Returns fewer than k hits when the filtered set is smaller; exact
        distance ties are broken by ascending record id.
        """
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        query = np.asarray(query_vec, dtype=float)
        if query.shape != (self.dimension,):
            raise ValueError(
                f"query has dimension {query.shape}, store expects ({self.dimension},)"
            )
        snapshot = list(self._records)
        candidates = [
            record
            for record in snapshot
            if (agent_name is None or record.agent_name == agent_name)
            and (status is None or record.status == status)
        ]
        scored = sorted(
            ((cosine_distance(query, record.embedding), record.id, record) for record in candidates),
            key=lambda item: (item[0], item[1]),
        )
        return [
            RetrievalHit(record=record, distance=distance, rank=rank)
            for rank, (distance, _, record) in enumerate(scored[:k], start=1)
        ]

    def save(self, path: str) -> None:
        """Write one JSON object per line (UTF-8)."""
        with open(path, "w", encoding="utf-8") as handle:
            for record in self._records:
                handle.write(json.dumps(record.to_dict(), sort_keys=True) + "\n")

    @classmethod
    def load(cls, path: str, dimension: int | None = None) -> "TrajectoryStore":
        """Read a line-delimited record file; malformed lines report their
        line number. The dimension is inferred from the first record unless
        given explicitly."""
        records: list[TaskSummaryRecord] = []
        with open(path, "r", encoding="utf-8") as handle:
            for line_number, line in enumerate(handle, start=1):
                text = line.strip()
                if not text:
                    continue
                try:
                    records.append(TaskSummaryRecord.from_dict(json.loads(text)))
                except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                    raise ValueError(
                        f"malformed record at {path}:{line_number}: {exc}"
                    ) from exc
        if dimension is None:
            dimension = len(records[0].embedding) if records else 64
        store = cls(dimension=dimension)
        for record in records:
            store.insert(record)
        return store


def bulk_load(store: TrajectoryStore, records: Iterable[TaskSummaryRecord]) -> int:
    """Insert records in order; returns the number inserted."""
    count = 0
    for record in records:
        store.insert(record)
        count += 1
    return count
