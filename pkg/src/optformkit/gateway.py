"""
Provider-agnostic chat-completion interface: an HTTP provider for
chat-completion APIs with retry/backoff, a mock provider for tests and
offline runs, a content-addressed replay cache for reproducibility, and
bounded-parallel batch execution.

API keys are read from the environment at call time via a named variable
and are never stored on configs, serialized requests, or cache files.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Protocol

import requests

__all__ = [
    "CompletionRequest",
    "CompletionResponse",
    "ProviderConfig",
    "Provider",
    "MockProvider",
    "HttpProvider",
    "ReplayOnlyProvider",
    "request_hash",
    "replay_lookup",
    "replay_store",
    "complete_with_cache",
    "run_batch",
    "GatewayError",
    "AuthError",
    "RateLimited",
    "TimeoutExceeded",
    "MalformedResponse",
    "CacheCorrupt",
    "CacheMiss",
]


class GatewayError(RuntimeError):
    """Base for provider/cache failures."""


class AuthError(GatewayError):
    """401/403 from the provider, or the key env var is unset. Not retried."""


class RateLimited(GatewayError):
    """429 responses persisted past the retry budget."""


class TimeoutExceeded(GatewayError):
    """Request timeouts persisted past the retry budget."""


class MalformedResponse(GatewayError):
    """Provider returned JSON without a usable first choice."""


class CacheCorrupt(GatewayError):
    """Cache file content does not match its recorded hash."""


class CacheMiss(GatewayError):
    """Replay-only provider was asked for an uncached request."""


@dataclass(frozen=True)
class CompletionRequest:
    model_id: str
    prompt: str
    system: str | None = None
    temperature: float = 0.0
    max_tokens: int = 512
    stop: tuple[str, ...] | None = None

    def __post_init__(self):
        if not self.prompt:
            raise ValueError("prompt must be nonempty")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")


@dataclass(frozen=True)
class CompletionResponse:
    text: str
    prompt_tokens: int = 0
    completion_tokens: int = 0
    latency_ms: int = 0
    provider: str = ""
    retries: int = 0


@dataclass(frozen=True)
class ProviderConfig:
    base_url: str = "https://api.openai.com/v1/chat/completions"
    api_key_env: str = "OPENAI_API_KEY"
    timeout_s: float = 60.0
    max_retries: int = 3
    backoff_base_ms: int = 250
    max_in_flight: int = 4


def _request_dict(request: CompletionRequest) -> dict:
    return {
        "model_id": request.model_id,
        "prompt": request.prompt,
        "system": request.system,
        "temperature": request.temperature,
        "max_tokens": request.max_tokens,
        "stop": list(request.stop) if request.stop else None,
    }


def _canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def request_hash(request: CompletionRequest) -> str:
    """Stable content hash over all request fields; any field change
    changes the key."""
    return hashlib.sha256(_canonical_json(_request_dict(request)).encode("utf-8")).hexdigest()


class Provider(Protocol):
    name: str

    def complete(self, request: CompletionRequest) -> CompletionResponse: ...


class MockProvider:
    """Offline provider. `respond` maps a request to its completion text;
    the default echoes the prompt. Tracks a call counter so tests can
    assert that cached runs make zero provider calls."""

    name = "mock"

    def __init__(self, respond: Callable[[CompletionRequest], str] | None = None, delay_s: float = 0.0):
        self._respond = respond or (lambda req: req.prompt)
        self._delay_s = delay_s
        self.calls = 0
        self._lock = threading.Lock()

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        with self._lock:
            self.calls += 1
        if self._delay_s:
            time.sleep(self._delay_s)
        text = self._respond(request)
        return CompletionResponse(text=text, completion_tokens=len(text.split()), provider=self.name)


class HttpProvider:
    """Chat-completions HTTP provider.

    Retries rate-limit (429) and server-error (5xx) statuses and timeouts
    with exponential backoff (base * 2^attempt, non-decreasing). 401/403
    fail immediately. `post` and `sleep` are injectable for tests.
    """

    name = "http"

    def __init__(self, config: ProviderConfig, post: Callable = requests.post, sleep: Callable[[float], None] = time.sleep):
        self.config = config
        self._post = post
        self._sleep = sleep

    def _api_key(self) -> str:
        key = os.environ.get(self.config.api_key_env)
        if not key:
            raise AuthError(f"environment variable {self.config.api_key_env} is not set")
        return key

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        key = self._api_key()
        messages = []
        if request.system:
            messages.append({"role": "system", "content": request.system})
        messages.append({"role": "user", "content": request.prompt})
        payload = {
            "model": request.model_id,
            "messages": messages,
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        if request.stop:
            payload["stop"] = list(request.stop)

        retries = 0
        last_error: GatewayError | None = None
        start = time.monotonic()
        for attempt in range(self.config.max_retries + 1):
            if attempt > 0:
                self._sleep(self.config.backoff_base_ms * (2 ** (attempt - 1)) / 1000.0)
                retries += 1
            try:
                resp = self._post(
                    self.config.base_url,
                    headers={"Authorization": f"Bearer {key}", "Content-Type": "application/json"},
                    json=payload,
                    timeout=self.config.timeout_s,
                )
            except requests.Timeout:
                last_error = TimeoutExceeded(f"request timed out after {self.config.timeout_s}s")
                continue
            status = getattr(resp, "status_code", 200)
            if status in (401, 403):
                raise AuthError(f"provider returned status {status}")
            if status == 429:
                last_error = RateLimited("provider returned status 429")
                continue
            if status >= 500:
                last_error = GatewayError(f"provider returned status {status}")
                continue
            body = resp.json()
            choices = body.get("choices") or []
            if not choices or "message" not in choices[0] or "content" not in choices[0]["message"]:
                raise MalformedResponse(f"no usable choices in response: {list(body)}")
            usage = body.get("usage") or {}
            return CompletionResponse(
                text=choices[0]["message"]["content"],
                prompt_tokens=int(usage.get("prompt_tokens", 0)),
                completion_tokens=int(usage.get("completion_tokens", 0)),
                latency_ms=int((time.monotonic() - start) * 1000),
                provider=self.name,
                retries=retries,
            )
        raise last_error if last_error is not None else GatewayError("retries exhausted")


# --- replay cache ----------------------------------------------------------

def _response_dict(response: CompletionResponse) -> dict:
    return {
        "text": response.text,
        "prompt_tokens": response.prompt_tokens,
        "completion_tokens": response.completion_tokens,
        "latency_ms": response.latency_ms,
        "provider": response.provider,
        "retries": response.retries,
    }


def _response_from_dict(d: dict) -> CompletionResponse:
    return CompletionResponse(
        text=d["text"],
        prompt_tokens=int(d.get("prompt_tokens", 0)),
        completion_tokens=int(d.get("completion_tokens", 0)),
        latency_ms=int(d.get("latency_ms", 0)),
        provider=d.get("provider", ""),
        retries=int(d.get("retries", 0)),
    )


_store_locks: dict[str, threading.Lock] = {}
_store_locks_guard = threading.Lock()


def _key_lock(key: str) -> threading.Lock:
    with _store_locks_guard:
        return _store_locks.setdefault(key, threading.Lock())


def replay_store(request: CompletionRequest, response: CompletionResponse, cache_dir: str | Path) -> Path:
    """Store a response under the request's content hash. Writes per key are
    serialized; the file records an integrity hash of the response payload."""
    key = request_hash(request)
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    payload = _canonical_json(_response_dict(response))
    record = {
        "request_hash": key,
        "response": _response_dict(response),
        "response_sha256": hashlib.sha256(payload.encode("utf-8")).hexdigest(),
    }
    path = cache_dir / f"{key}.json"
    with _key_lock(key):
        path.write_text(_canonical_json(record), encoding="utf-8")
    return path


def replay_lookup(request: CompletionRequest, cache_dir: str | Path) -> CompletionResponse | None:
    """Fetch the stored response for an identical request, or None. Raises
    CacheCorrupt when the stored content fails its integrity hash."""
    key = request_hash(request)
    path = Path(cache_dir) / f"{key}.json"
    if not path.exists():
        return None
    try:
        record = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CacheCorrupt(f"unreadable cache file {path}") from exc
    if record.get("request_hash") != key:
        raise CacheCorrupt(f"cache file {path} keyed for a different request")
    payload = _canonical_json(record.get("response", {}))
    if hashlib.sha256(payload.encode("utf-8")).hexdigest() != record.get("response_sha256"):
        raise CacheCorrupt(f"cache file {path} failed its integrity hash")
    return _response_from_dict(record["response"])


class ReplayOnlyProvider:
    """Serves exclusively from a populated replay cache; uncached requests
    are a CacheMiss error."""

    name = "replay"

    def __init__(self, cache_dir: str | Path):
        self.cache_dir = Path(cache_dir)

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        cached = replay_lookup(request, self.cache_dir)
        if cached is None:
            raise CacheMiss(f"no cached response for request {request_hash(request)[:12]}")
        return cached


def complete_with_cache(request: CompletionRequest, provider: Provider, cache_dir: str | Path | None) -> CompletionResponse:
    """Cache-first completion: return the cached response when present,
    otherwise call the provider and store the result."""
    if cache_dir is not None:
        cached = replay_lookup(request, cache_dir)
        if cached is not None:
            return cached
    response = provider.complete(request)
    if cache_dir is not None:
        replay_store(request, response, cache_dir)
    return response


@dataclass(frozen=True)
class BatchResult:
    request_id: str
    response: CompletionResponse | None
    error: str | None = None


def run_batch(
    requests_with_ids: list[tuple[str, CompletionRequest]],
    provider: Provider,
    config: ProviderConfig | None = None,
    cache_dir: str | Path | None = None,
) -> list[BatchResult]:
    """Execute a batch with at most config.max_in_flight requests
    outstanding. Output order equals input order regardless of completion
    order; per-request failures are captured as data and never abort the
    batch. Requires distinct request ids."""
    config = config or ProviderConfig()
    ids = [rid for rid, _ in requests_with_ids]
    if len(set(ids)) != len(ids):
        raise ValueError("request ids must be distinct")

    def one(item: tuple[str, CompletionRequest]) -> BatchResult:
        rid, request = item
        try:
            return BatchResult(rid, complete_with_cache(request, provider, cache_dir))
        except GatewayError as exc:
            return BatchResult(rid, None, error=f"{type(exc).__name__}: {exc}")

    if not requests_with_ids:
        return []
    with ThreadPoolExecutor(max_workers=max(1, config.max_in_flight)) as pool:
        return list(pool.map(one, requests_with_ids))
