import json

import pytest
import requests

from plancontrol import (
    ConfigurationError,
    HttpBackend,
    ScriptExhaustedError,
    ScriptedBackend,
    TransportError,
    whitespace_token_count,
)


class TestScriptedBackend:
    def test_queue_returns_entries_in_order(self):
        backend = ScriptedBackend(script=["A", "B"])
        assert backend.complete("p").completion == "A"
        assert backend.complete("p").completion == "B"

    def test_queue_exhaustion(self):
        backend = ScriptedBackend(script=["only"])
        backend.complete("p")
        with pytest.raises(ScriptExhaustedError):
            backend.complete("p")

    def test_map_mode_lookup_and_missing_key(self):
        backend = ScriptedBackend(keyed={"critic": "judgment"})
        assert backend.complete("p", key="critic").completion == "judgment"
        with pytest.raises(ScriptExhaustedError):
            backend.complete("p", key="simulator")
        with pytest.raises(ScriptExhaustedError):
            backend.complete("p")

    def test_requires_exactly_one_mode(self):
        with pytest.raises(ValueError):
            ScriptedBackend()
        with pytest.raises(ValueError):
            ScriptedBackend(script=["a"], keyed={"k": "v"})

    def test_whitespace_token_accounting(self):
        backend = ScriptedBackend(script=["a b c"])
        record = backend.complete("one two")
        assert record.tokens_in == 2
        assert record.tokens_out == 3

    def test_entry_token_overrides(self):
        backend = ScriptedBackend(
            script=[{"text": "short", "tokens_in": 4136, "tokens_out": 97}]
        )
        record = backend.complete("prompt")
        assert (record.tokens_in, record.tokens_out) == (4136, 97)

    def test_default_params_recorded_in_audit_log(self):
        backend = ScriptedBackend(script=["x"])
        backend.complete("p")
        entry = backend.audit_log[0]
        assert entry["temperature"] == 0.0
        assert entry["max_tokens"] == 8192

    def test_audit_log_complete_and_ordered(self, tmp_path):
        backend = ScriptedBackend(script=["1", "2", "3"])
        for _ in range(3):
            backend.complete("p")
        assert len(backend.audit_log) == 3
        assert [e["tokens_out"] for e in backend.audit_log] == [1, 1, 1]
        out = tmp_path / "audit.jsonl"
        backend.save_audit_log(str(out))
        lines = out.read_text().strip().splitlines()
        assert len(lines) == 3
        assert all(json.loads(line)["backend_id"] == "scripted" for line in lines)

    def test_mock_determinism(self):
        records_a = [ScriptedBackend(script=["x", "y"]).complete("p") for _ in range(1)]
        records_b = [ScriptedBackend(script=["x", "y"]).complete("p") for _ in range(1)]
        for a, b in zip(records_a, records_b):
            assert (a.completion, a.tokens_in, a.tokens_out) == (
                b.completion,
                b.tokens_in,
                b.tokens_out,
            )


class _FakeResponse:
    def __init__(self, payload, status=200):
        self._payload = payload
        self.status_code = status

    def raise_for_status(self):
        if self.status_code >= 400:
            raise requests.HTTPError(f"status {self.status_code}")

    def json(self):
        return self._payload


class TestHttpBackend:
    def test_requires_url(self, monkeypatch):
        monkeypatch.delenv("PLANCONTROL_LLM_URL", raising=False)
        with pytest.raises(ConfigurationError):
            HttpBackend()

    def test_success_passes_usage_counts(self, monkeypatch):
        def fake_post(url, json=None, headers=None, timeout=None):
            assert json["prompt"] == "hello"
            assert json["temperature"] == 0.0
            assert json["max_tokens"] == 8192
            return _FakeResponse(
                {"completion": "world", "tokens_in": 10, "tokens_out": 2}
            )

        monkeypatch.setattr(requests, "post", fake_post)
        backend = HttpBackend(url="http://llm.test/complete")
        record = backend.complete("hello")
        assert record.completion == "world"
        assert (record.tokens_in, record.tokens_out) == (10, 2)

    def test_auth_header_from_env(self, monkeypatch):
        seen = {}

        def fake_post(url, json=None, headers=None, timeout=None):
            seen.update(headers)
            return _FakeResponse({"completion": "ok"})

        monkeypatch.setattr(requests, "post", fake_post)
        monkeypatch.setenv("PLANCONTROL_LLM_URL", "http://llm.test/complete")
        monkeypatch.setenv("PLANCONTROL_LLM_TOKEN", "secret")
        HttpBackend().complete("p")
        assert seen["Authorization"] == "Bearer secret"

    def test_transport_error_carries_retry_metadata(self, monkeypatch):
        calls = {"n": 0}

        def fake_post(url, json=None, headers=None, timeout=None):
            calls["n"] += 1
            raise requests.ConnectionError("refused")

        monkeypatch.setattr(requests, "post", fake_post)
        backend = HttpBackend(url="http://llm.test/complete", max_retries=2)
        with pytest.raises(TransportError) as excinfo:
            backend.complete("p")
        assert calls["n"] == 3
        assert excinfo.value.retries == 2

    def test_missing_usage_falls_back_to_whitespace(self, monkeypatch):
        monkeypatch.setattr(
            requests, "post", lambda *a, **k: _FakeResponse({"completion": "x y z"})
        )
        backend = HttpBackend(url="http://llm.test/complete")
        record = backend.complete("a b")
        assert record.tokens_in == whitespace_token_count("a b") == 2
        assert record.tokens_out == 3
