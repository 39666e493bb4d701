"""Provider-neutral chat-completion clients.

All clients share one contract: complete(request) -> GatewayResponse, with
transient failures retried up to request.max_attempts (exponential backoff,
jittered). Responses can be archived to a JSONL log keyed by request hash,
which the ReplayClient consumes for fully offline runs.
"""

from __future__ import annotations

import hashlib
import json
import os
import random
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

ENV_URL = "LLM_GATEWAY_URL"
ENV_KEY = "LLM_API_KEY"
ENV_MODEL = "LLM_MODEL_ID"

# Decoding is pinned to the most deterministic setting the provider offers;
# runs record it so results stay attributable to a configuration.
DETERMINISTIC_DECODING = {"temperature": 0.0}


@dataclass(frozen=True)
class GatewayRequest:
    model_id: str
    system_text: str
    user_text: str
    max_attempts: int = 3

    def to_wire(self) -> dict:
        return {
            "model": self.model_id,
            "messages": [
                {"role": "system", "content": self.system_text},
                {"role": "user", "content": self.user_text},
            ],
            **DETERMINISTIC_DECODING,
        }


@dataclass
class GatewayResponse:
    raw_text: str
    usage: dict = field(default_factory=dict)
    latency_s: float = 0.0
    attempts: int = 1
    request_hash: str = ""


class GatewayAuthError(RuntimeError):
    """Authentication/configuration failure; never retried."""


class GatewayTransientError(RuntimeError):
    """Retriable failure (network, 5xx, rate limit)."""


class GatewayRetryError(RuntimeError):
    """Raised once max_attempts transient failures have been burned."""


class GatewayAbort(RuntimeError):
    """Fatal gateway failure mid-run; carries the work completed so far."""

    def __init__(self, message: str, completed):
        super().__init__(message)
        self.completed = completed


def request_hash(request: GatewayRequest) -> str:
    payload = json.dumps(
        {
            "model": request.model_id,
            "system": request.system_text,
            "user": request.user_text,
        },
        sort_keys=True,
        ensure_ascii=False,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class ResponseLog:
    """Append-only JSONL archive of gateway responses, keyed by request hash."""

    def __init__(self, path: str | Path):
        self.path = Path(path)

    def append(self, req_hash: str, raw_text: str, status: str = "ok") -> None:
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(
                json.dumps(
                    {"request_hash": req_hash, "raw_text": raw_text, "status": status},
                    ensure_ascii=False,
                )
            )
            fh.write("\n")

    @staticmethod
    def load(path: str | Path) -> dict[str, str]:
        entries: dict[str, str] = {}
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    raw = json.loads(line)
                    entries[raw["request_hash"]] = raw["raw_text"]
        return entries


class _RetryingClient:
    """Shared retry loop; subclasses implement _send."""

    def __init__(self, backoff_base: float = 1.0, sleep: Callable[[float], None] = time.sleep):
        self._backoff_base = backoff_base
        self._sleep = sleep
        self._rng = random.Random()

    def _send(self, request: GatewayRequest) -> str:
        raise NotImplementedError

    def complete(self, request: GatewayRequest) -> GatewayResponse:
        started = time.monotonic()
        last_error: Exception | None = None
        for attempt in range(1, max(1, request.max_attempts) + 1):
            try:
                raw = self._send(request)
                return GatewayResponse(
                    raw_text=raw,
                    latency_s=time.monotonic() - started,
                    attempts=attempt,
                    request_hash=request_hash(request),
                )
            except GatewayTransientError as exc:
                last_error = exc
                if attempt < request.max_attempts:
                    delay = self._backoff_base * (2 ** (attempt - 1))
                    self._sleep(delay * (1.0 + 0.25 * self._rng.random()))
        raise GatewayRetryError(
            f"gave up after {request.max_attempts} attempts: {last_error}"
        )


class ChatGatewayClient(_RetryingClient):
    """HTTP client for a chat-completions-style gateway endpoint.

    Shareable across workers; an optional client-side rate limit spaces out
    sends so a concurrency pool cannot exceed the provider's request budget.
    """

    def __init__(
        self,
        url: str | None = None,
        api_key: str | None = None,
        model_id: str | None = None,
        timeout: float = 60.0,
        backoff_base: float = 1.0,
        rate_limit_per_s: float | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        super().__init__(backoff_base, sleep)
        self.url = url or os.environ.get(ENV_URL)
        self.api_key = api_key or os.environ.get(ENV_KEY)
        self.model_id = model_id or os.environ.get(ENV_MODEL, "")
        self.timeout = timeout
        self._min_interval = 1.0 / rate_limit_per_s if rate_limit_per_s else 0.0
        self._rate_lock = threading.Lock()
        self._next_slot = 0.0
        if not self.url:
            raise GatewayAuthError(f"gateway URL not configured (set {ENV_URL})")

    def _throttle(self) -> None:
        if not self._min_interval:
            return
        with self._rate_lock:
            now = time.monotonic()
            slot = max(now, self._next_slot)
            self._next_slot = slot + self._min_interval
        wait = slot - now
        if wait > 0:
            self._sleep(wait)

    def _send(self, request: GatewayRequest) -> str:
        self._throttle()
        import httpx

        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        try:
            resp = httpx.post(self.url, json=request.to_wire(), headers=headers, timeout=self.timeout)
        except httpx.HTTPError as exc:
            raise GatewayTransientError(str(exc)) from None
        if resp.status_code in (401, 403):
            raise GatewayAuthError(f"gateway rejected credentials ({resp.status_code})")
        if resp.status_code >= 400:
            raise GatewayTransientError(f"gateway returned {resp.status_code}")
        data = resp.json()
        try:
            return data["choices"][0]["message"]["content"] or ""
        except (KeyError, IndexError, TypeError):
            for key in ("content", "text"):
                if isinstance(data.get(key), str):
                    return data[key]
        raise GatewayTransientError("gateway response had no message content")


class MockChatClient(_RetryingClient):
    """Scripted client for offline runs and tests.

    ``responder`` maps a GatewayRequest to raw response text. ``flaky``
    injects that many transient failures before each first success, which
    exercises the retry path.
    """

    def __init__(
        self,
        responder: Callable[[GatewayRequest], str],
        model_id: str = "mock-model",
        flaky: int = 0,
    ):
        super().__init__(backoff_base=0.0, sleep=lambda _s: None)
        self.responder = responder
        self.model_id = model_id
        self._flaky = flaky
        self._failures: dict[str, int] = {}
        self._lock = threading.Lock()  # shareable across pool workers
        self.calls = 0

    def _send(self, request: GatewayRequest) -> str:
        key = request_hash(request)
        with self._lock:
            self.calls += 1
            if self._failures.get(key, 0) < self._flaky:
                self._failures[key] = self._failures.get(key, 0) + 1
                raise GatewayTransientError("scripted transient failure")
        return self.responder(request)


class ReplayClient:
    """Replays archived responses; any unknown request is a hard error."""

    def __init__(self, log_path: str | Path, model_id: str = "replay"):
        self._entries = ResponseLog.load(log_path)
        self.model_id = model_id

    def complete(self, request: GatewayRequest) -> GatewayResponse:
        key = request_hash(request)
        if key not in self._entries:
            raise GatewayAuthError(f"no archived response for request {key[:12]}…")
        return GatewayResponse(raw_text=self._entries[key], attempts=1, request_hash=key)
