"""Shared exception types for port and configuration failures."""

from __future__ import annotations


class ConfigurationError(RuntimeError):
    """A required configuration value (store location, endpoint URL) is missing."""


class TransportError(RuntimeError):
    """A completion backend failed after exhausting its retries."""

    def __init__(self, message: str, retries: int = 0):
        super().__init__(message)
        self.retries = retries


class ScriptExhaustedError(RuntimeError):
    """A scripted backend ran out of queued entries or was asked for an unknown key."""
