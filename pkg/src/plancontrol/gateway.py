"""Uniform text-completion port with token accounting and an audit log.

Two backends ship with the package: a deterministic scripted mock for tests
and batch replays, and a single-endpoint HTTP backend for real services.
Both append every call to an in-memory audit log that can be flushed to a
line-delimited file for post-hoc verification of call conditions.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass
from typing import Iterable, Mapping

import requests

from .errors import ConfigurationError, ScriptExhaustedError, TransportError

DEFAULT_TEMPERATURE = 0.0
DEFAULT_MAX_TOKENS = 8192

ENV_HTTP_URL = "PLANCONTROL_LLM_URL"
ENV_HTTP_TOKEN = "PLANCONTROL_LLM_TOKEN"


@dataclass(frozen=True)
class CompletionRecord:
    prompt: str
    completion: str
    tokens_in: int
    tokens_out: int
    latency: float
    backend_id: str


def whitespace_token_count(text: str) -> int:
    """Stable token-count proxy: number of whitespace-separated units."""
    return len(text.split())


class _AuditLogMixin:
    """Per-backend call log; appends are serialized by the GIL per instance."""

    backend_id: str

    def _init_audit(self) -> None:
        self.audit_log: list[dict] = []

    def _log_call(
        self,
        *,
        temperature: float,
        max_tokens: int,
        tokens_in: int,
        tokens_out: int,
        retries: int,
    ) -> None:
        self.audit_log.append(
            {
                "timestamp": time.time(),
                "backend_id": self.backend_id,
                "temperature": temperature,
                "max_tokens": max_tokens,
                "tokens_in": tokens_in,
                "tokens_out": tokens_out,
                "retries": retries,
            }
        )

    def save_audit_log(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            for entry in self.audit_log:
                handle.write(json.dumps(entry, sort_keys=True) + "\n")


def _normalize_entry(entry: object) -> tuple[str, int | None, int | None]:
    """A script entry is a completion string or a dict with optional token
    overrides ({"text": ..., "tokens_in": ..., "tokens_out": ...})."""
    if isinstance(entry, str):
        return entry, None, None
    if isinstance(entry, Mapping):
        text = entry.get("text", "")
        tokens_in = entry.get("tokens_in")
        tokens_out = entry.get("tokens_out")
        return str(text), tokens_in, tokens_out
    raise TypeError(f"unsupported script entry type: {type(entry).__name__}")


class ScriptedBackend(_AuditLogMixin):
    """Deterministic completion backend driven by a queue or a key map.

    Queue mode replays entries in order and raises ScriptExhaustedError when
    the queue runs dry; map mode serves the entry stored under the key the
    caller supplies with the request. Token counts default to whitespace
    counting unless an entry carries explicit overrides.
    """

    def __init__(
        self,
        script: Iterable[object] | None = None,
        keyed: Mapping[str, object] | None = None,
        backend_id: str = "scripted",
    ):
        if (script is None) == (keyed is None):
            raise ValueError("provide exactly one of script (queue) or keyed (map)")
        self._queue = list(script) if script is not None else None
        self._keyed = dict(keyed) if keyed is not None else None
        self._cursor = 0
        self.backend_id = backend_id
        self._init_audit()

    def complete(
        self,
        prompt: str,
        *,
        temperature: float = DEFAULT_TEMPERATURE,
        max_tokens: int = DEFAULT_MAX_TOKENS,
        key: str | None = None,
    ) -> CompletionRecord:
        if self._queue is not None:
            if self._cursor >= len(self._queue):
                raise ScriptExhaustedError(
                    f"scripted backend '{self.backend_id}' exhausted after "
                    f"{len(self._queue)} entries"
                )
            entry = self._queue[self._cursor]
            self._cursor += 1
        else:
            assert self._keyed is not None
            if key is None or key not in self._keyed:
                raise ScriptExhaustedError(
                    f"scripted backend '{self.backend_id}' has no entry for key {key!r}"
                )
            entry = self._keyed[key]

        text, tokens_in, tokens_out = _normalize_entry(entry)
        if tokens_in is None:
            tokens_in = whitespace_token_count(prompt)
        if tokens_out is None:
            tokens_out = whitespace_token_count(text)
        self._log_call(
            temperature=temperature,
            max_tokens=max_tokens,
            tokens_in=tokens_in,
            tokens_out=tokens_out,
            retries=0,
        )
        return CompletionRecord(
            prompt=prompt,
            completion=text,
            tokens_in=tokens_in,
            tokens_out=tokens_out,
            latency=0.0,
            backend_id=self.backend_id,
        )


class HttpBackend(_AuditLogMixin):
    """Single-endpoint text-completion client.

    Request body: ``{"prompt": ..., "temperature": ..., "max_tokens": ...}``.
    Expected response body: ``{"completion": str, "tokens_in": int,
    "tokens_out": int}`` (missing counts fall back to whitespace counting).
    URL and bearer token come from the constructor or the environment keys
    PLANCONTROL_LLM_URL / PLANCONTROL_LLM_TOKEN.
    """

    def __init__(
        self,
        url: str | None = None,
        auth_token: str | None = None,
        timeout: float = 60.0,
        max_retries: int = 2,
        backend_id: str = "http",
    ):
        self.url = url or os.environ.get(ENV_HTTP_URL)
        if not self.url:
            raise ConfigurationError(
                f"HTTP backend URL is not configured; pass url= or set {ENV_HTTP_URL}"
            )
        self.auth_token = auth_token or os.environ.get(ENV_HTTP_TOKEN)
        self.timeout = timeout
        self.max_retries = max_retries
        self.backend_id = backend_id
        self._init_audit()

    def complete(
        self,
        prompt: str,
        *,
        temperature: float = DEFAULT_TEMPERATURE,
        max_tokens: int = DEFAULT_MAX_TOKENS,
        key: str | None = None,
    ) -> CompletionRecord:
        del key  # keyed dispatch is a scripted-backend concept
        headers = {"Content-Type": "application/json"}
        if self.auth_token:
            headers["Authorization"] = f"Bearer {self.auth_token}"
        payload = {
            "prompt": prompt,
            "temperature": temperature,
            "max_tokens": max_tokens,
        }

        last_error: Exception | None = None
        started = time.monotonic()
        for attempt in range(self.max_retries + 1):
            try:
                response = requests.post(
                    self.url, json=payload, headers=headers, timeout=self.timeout
                )
                response.raise_for_status()
                data = response.json()
                break
            except (requests.RequestException, ValueError) as exc:
                last_error = exc
        else:
            raise TransportError(
                f"completion request to {self.url} failed after "
                f"{self.max_retries + 1} attempts: {last_error}",
                retries=self.max_retries,
            )

        completion = str(data.get("completion", ""))
        tokens_in = int(data.get("tokens_in", whitespace_token_count(prompt)))
        tokens_out = int(data.get("tokens_out", whitespace_token_count(completion)))
        self._log_call(
            temperature=temperature,
            max_tokens=max_tokens,
            tokens_in=tokens_in,
            tokens_out=tokens_out,
            retries=attempt,
        )
        return CompletionRecord(
            prompt=prompt,
            completion=completion,
            tokens_in=tokens_in,
            tokens_out=tokens_out,
            latency=time.monotonic() - started,
            backend_id=self.backend_id,
        )
