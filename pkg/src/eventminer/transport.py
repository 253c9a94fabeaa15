"""Chat-completion transports: HTTP endpoint, fixture directory, retry policy.

The transport contract is a single user message in, a single text string out.
The optional `key` rides alongside so fixture transports can resolve a
response file without smuggling identifiers into the message itself.
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Protocol

import requests

from eventminer.errors import ConfigError, TransportError, TransportExhausted


@dataclass(frozen=True)
class TransportPolicy:
    model_id: str = "gpt-4o-mini"
    temperature: float = 0.0
    max_attempts: int = 3
    backoff_schedule: tuple[float, ...] = (0.5, 1.0, 2.0)
    rate_limit: float | None = None  # requests per second

    def __post_init__(self):
        if self.max_attempts < 1:
            raise ConfigError("max_attempts must be >= 1")
        if not 0.0 <= self.temperature <= 2.0:
            raise ConfigError("temperature must lie in [0, 2]")
        if self.rate_limit is not None and self.rate_limit <= 0:
            raise ConfigError("rate_limit must be positive")


class ChatTransport(Protocol):
    def complete(self, model_id: str, temperature: float, message: str,
                 key: str | None = None) -> str: ...


class RateLimiter:
    """Global minimum-interval limiter shared across worker threads."""

    def __init__(self, per_second: float,
                 clock: Callable[[], float] = time.monotonic,
                 sleep: Callable[[float], None] = time.sleep):
        self.interval = 1.0 / per_second
        self._clock = clock
        self._sleep = sleep
        self._lock = threading.Lock()
        self._next_allowed = clock()

    def acquire(self) -> None:
        with self._lock:
            now = self._clock()
            wait = self._next_allowed - now
            self._next_allowed = max(self._next_allowed, now) + self.interval
        if wait > 0:
            self._sleep(wait)


def with_retries(call: Callable[[], str], policy: TransportPolicy,
                 sleep: Callable[[float], None] = time.sleep,
                 attempt_log: list | None = None) -> str:
    """Run `call` under the policy's retry budget.

    Transient TransportErrors are retried with the policy's backoff schedule;
    the schedule's last entry repeats if attempts outnumber entries.
    """
    last: TransportError | None = None
    for attempt in range(1, policy.max_attempts + 1):
        try:
            result = call()
            if attempt_log is not None:
                attempt_log.append((attempt, "ok"))
            return result
        except TransportError as exc:
            last = exc
            if attempt_log is not None:
                attempt_log.append((attempt, str(exc)))
            if attempt < policy.max_attempts and policy.backoff_schedule:
                idx = min(attempt - 1, len(policy.backoff_schedule) - 1)
                sleep(policy.backoff_schedule[idx])
    raise TransportExhausted(
        f"gave up after {policy.max_attempts} attempts: {last}")


class HTTPChatTransport:
    """Minimal chat-completions client against an OpenAI-style endpoint."""

    def __init__(self, endpoint: str, api_key_env: str = "EVENTMINER_API_KEY",
                 timeout: float = 60.0, session: requests.Session | None = None):
        self.endpoint = endpoint
        self.api_key_env = api_key_env
        self.timeout = timeout
        self.session = session or requests.Session()

    def complete(self, model_id: str, temperature: float, message: str,
                 key: str | None = None) -> str:
        api_key = os.environ.get(self.api_key_env)
        if not api_key:
            raise ConfigError(f"missing API key in ${self.api_key_env}")
        payload = {
            "model": model_id,
            "temperature": temperature,
            "messages": [{"role": "user", "content": message}],
        }
        try:
            resp = self.session.post(
                self.endpoint, json=payload, timeout=self.timeout,
                headers={"Authorization": f"Bearer {api_key}"})
        except requests.RequestException as exc:
            raise TransportError(f"request failed: {exc}") from exc
        if resp.status_code != 200:
            raise TransportError(f"HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            return resp.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError) as exc:
            raise TransportError(f"malformed completion payload: {exc}") from exc


class FixtureTransport:
    """Deterministic transport reading one response file per article key."""

    def __init__(self, root: str | Path, suffix: str = ".txt"):
        self.root = Path(root)
        self.suffix = suffix
        self.calls = 0

    def complete(self, model_id: str, temperature: float, message: str,
                 key: str | None = None) -> str:
        self.calls += 1
        if key is None:
            raise TransportError("fixture transport requires a response key")
        path = self.root / f"{key}{self.suffix}"
        if not path.is_file():
            raise TransportError(f"no fixture response for {key!r}")
        return path.read_text("utf-8")
