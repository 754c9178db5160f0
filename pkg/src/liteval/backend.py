"""Provider-neutral chat-completion client.

Two providers share one call contract (``provider.complete(request)``):

* HttpProvider speaks the common OpenAI-style /chat/completions JSON shape
  over httpx, with bounded concurrency, a token-bucket rate limit, and
  exponential-backoff retries. 429/5xx/timeouts are retried; 401/403 never.
* MockProvider returns canned text deterministically and makes no network
  calls. Lookup order: exact request fingerprint, first matching substring
  rule, echo, default verdict.

``parse_verdict`` extracts the first balanced JSON object from a model
response, which may be wrapped in prose or code fences.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

import httpx

from .errors import (
    AuthError,
    ProviderError,
    ProviderTimeout,
    RateLimitedError,
    UnparseableVerdict,
)

log = logging.getLogger(__name__)

DEFAULT_TEMPERATURE = 0.1
DEFAULT_MAX_OUTPUT_TOKENS = 1024
DEFAULT_MAX_CONCURRENCY = 4

# scores this far outside [0, 1] are clamped with a warning; further is an error
CLAMP_TOLERANCE = 0.05

DEFAULT_MOCK_VERDICT: Mapping[str, Any] = {"score": 0.5, "feedback": "mock default"}


@dataclass(frozen=True)
class CompletionRequest:
    model_id: str
    system_prompt: str
    user_prompt: str
    temperature: float = DEFAULT_TEMPERATURE
    max_output_tokens: int = DEFAULT_MAX_OUTPUT_TOKENS

    def __post_init__(self) -> None:
        if not self.model_id:
            raise ValueError("model_id must be non-empty")
        if not self.system_prompt or not self.user_prompt:
            raise ValueError("system_prompt and user_prompt must be non-empty")
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError(f"temperature must be in [0, 2], got {self.temperature}")
        if self.max_output_tokens <= 0:
            raise ValueError("max_output_tokens must be positive")


@dataclass(frozen=True)
class CompletionResponse:
    text: str
    model_id: str
    latency_s: float
    # (prompt_tokens, completion_tokens) when the provider reports usage
    token_usage: tuple[int, int] | None = None


@dataclass(frozen=True)
class AgentVerdict:
    score: float
    feedback: str
    evidence: tuple[tuple[str, str], ...] = ()
    extras: Mapping[str, Any] = field(default_factory=dict)


def fingerprint(system_prompt: str, user_prompt: str, model_id: str) -> str:
    """Stable identity of a completion request, for mock lookup tables."""
    h = hashlib.sha256()
    for part in (system_prompt, user_prompt, model_id):
        h.update(part.encode("utf-8"))
        h.update(b"\x1f")
    return h.hexdigest()


_decoder = json.JSONDecoder()


def extract_first_json_object(text: str) -> dict | None:
    """First balanced JSON object found anywhere in text, or None."""
    for pos, ch in enumerate(text):
        if ch != "{":
            continue
        try:
            obj, _ = _decoder.raw_decode(text, pos)
        except json.JSONDecodeError:
            continue
        if isinstance(obj, dict):
            return obj
    return None


def _coerce_evidence(raw: Any) -> tuple[tuple[str, str], ...]:
    if not isinstance(raw, list):
        return ()
    pairs = []
    for item in raw:
        if isinstance(item, (list, tuple)) and len(item) == 2 \
                and all(isinstance(x, str) for x in item):
            pairs.append((item[0], item[1]))
        elif isinstance(item, str):
            pairs.append((item, ""))
    return tuple(pairs)


def parse_verdict(response_text: str) -> AgentVerdict:
    """Parse a model response into an AgentVerdict.

    The response must contain a JSON object with a numeric "score"; scores
    outside [0, 1] by at most CLAMP_TOLERANCE are clamped with a warning,
    anything further raises UnparseableVerdict. Missing or blank feedback
    is replaced with a placeholder rather than rejected. Keys other than
    score/feedback/evidence are kept in ``extras``.
    """
    obj = extract_first_json_object(response_text or "")
    if obj is None:
        raise UnparseableVerdict("no JSON object found in response")
    raw_score = obj.get("score")
    if isinstance(raw_score, bool) or not isinstance(raw_score, (int, float)):
        raise UnparseableVerdict(f"score missing or non-numeric: {raw_score!r}")
    score = float(raw_score)
    if not math.isfinite(score):
        raise UnparseableVerdict(f"score is not finite: {score!r}")
    if score < -CLAMP_TOLERANCE or score > 1.0 + CLAMP_TOLERANCE:
        raise UnparseableVerdict(
            f"score {score} outside [0, 1] by more than {CLAMP_TOLERANCE}")
    if score < 0.0 or score > 1.0:
        clamped = min(1.0, max(0.0, score))
        log.warning("clamping out-of-range score %s to %s", score, clamped)
        score = clamped
    feedback = obj.get("feedback")
    if not isinstance(feedback, str) or not feedback.strip():
        log.warning("verdict has no usable feedback; substituting placeholder")
        feedback = "(no feedback provided)"
    extras = {k: v for k, v in obj.items()
              if k not in ("score", "feedback", "evidence")}
    return AgentVerdict(score=score, feedback=feedback,
                        evidence=_coerce_evidence(obj.get("evidence")),
                        extras=extras)


def serialize_verdict(verdict: AgentVerdict) -> str:
    """JSON text that parse_verdict maps back to an equal verdict."""
    obj: dict[str, Any] = {
        "score": verdict.score,
        "feedback": verdict.feedback,
        "evidence": [list(pair) for pair in verdict.evidence],
    }
    for key, value in verdict.extras.items():
        if key not in obj:
            obj[key] = value
    return json.dumps(obj, ensure_ascii=False)


@dataclass(frozen=True)
class MockRule:
    """Substring trigger: fires when every needle occurs in the combined
    system + user prompt text."""
    contains: tuple[str, ...]
    response: str


def _as_response_text(value: Any) -> str:
    # fixtures may give raw strings or JSON objects (serialized for them)
    if isinstance(value, str):
        return value
    return json.dumps(value, ensure_ascii=False)


class MockProvider:
    """Deterministic canned-response provider; byte-identical replies for
    identical requests, no I/O."""

    def __init__(self, canned: Mapping[str, Any] | None = None, *,
                 rules: Sequence[MockRule] = (),
                 default: Any = DEFAULT_MOCK_VERDICT,
                 echo: bool = False,
                 model_id: str = "mock",
                 max_concurrency: int = DEFAULT_MAX_CONCURRENCY) -> None:
        self.canned = {k: _as_response_text(v) for k, v in (canned or {}).items()}
        self.rules = [
            MockRule((rule.contains,) if isinstance(rule.contains, str)
                     else tuple(rule.contains),
                     _as_response_text(rule.response))
            for rule in rules
        ]
        self.default_text = None if default is None else _as_response_text(default)
        self.echo = echo
        self.model_id = model_id
        self.max_concurrency = max_concurrency

    @classmethod
    def from_fixture(cls, path: str | Path, **kwargs: Any) -> "MockProvider":
        """Load a JSON fixture: {"default": ..., "responses": {fingerprint:
        ...}, "rules": [{"contains": str|[str], "response": ...}],
        "echo": bool, "model_id": str}. All keys optional."""
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(data, dict):
            raise ValueError(f"{path}: mock fixture must be a JSON object")
        rules = []
        for i, raw in enumerate(data.get("rules", [])):
            needles = raw.get("contains")
            if isinstance(needles, str):
                needles = [needles]
            if not needles or "response" not in raw:
                raise ValueError(f"{path}: rule {i} needs 'contains' and 'response'")
            rules.append(MockRule(tuple(needles),
                                  _as_response_text(raw["response"])))
        kwargs.setdefault("model_id", data.get("model_id", "mock"))
        return cls(
            canned=data.get("responses"),
            rules=rules,
            default=data.get("default", DEFAULT_MOCK_VERDICT),
            echo=bool(data.get("echo", False)),
            **kwargs,
        )

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        fp = fingerprint(request.system_prompt, request.user_prompt,
                         request.model_id)
        text = self.canned.get(fp)
        if text is None:
            haystack = request.system_prompt + "\n" + request.user_prompt
            for rule in self.rules:
                if all(needle in haystack for needle in rule.contains):
                    text = rule.response
                    break
        if text is None and self.echo:
            text = request.user_prompt
        if text is None:
            if self.default_text is None:
                raise ProviderError("no canned response matches the request")
            text = self.default_text
        return CompletionResponse(text=text, model_id=request.model_id,
                                  latency_s=0.0)


def mock_provider(canned: Mapping[str, Any] | None = None,
                  **kwargs: Any) -> MockProvider:
    return MockProvider(canned, **kwargs)


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = 4
    base_delay_ms: int = 250

    def __post_init__(self) -> None:
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")
        if self.base_delay_ms < 0:
            raise ValueError("base_delay_ms must be >= 0")


@dataclass(frozen=True)
class ProviderSettings:
    endpoint: str
    model: str
    api_key_env: str | None = "LITEVAL_API_KEY"
    max_concurrency: int = DEFAULT_MAX_CONCURRENCY
    requests_per_second: float = 8.0
    burst: int = 8
    timeout_s: float = 60.0
    retry: RetryPolicy = RetryPolicy()

    def __post_init__(self) -> None:
        if not self.endpoint or not self.model:
            raise ValueError("endpoint and model must be non-empty")
        if self.max_concurrency < 1:
            raise ValueError("max_concurrency must be >= 1")
        if self.requests_per_second <= 0 or self.burst < 1:
            raise ValueError("requests_per_second and burst must be positive")

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "ProviderSettings":
        retry_raw = data.get("retry", {})
        retry = RetryPolicy(
            max_attempts=int(retry_raw.get("max_attempts", 4)),
            base_delay_ms=int(retry_raw.get("base_delay_ms", 250)),
        )
        return cls(
            endpoint=data.get("endpoint", ""),
            model=data.get("model", ""),
            api_key_env=data.get("api_key_env", "LITEVAL_API_KEY") or None,
            max_concurrency=int(data.get("max_concurrency",
                                         DEFAULT_MAX_CONCURRENCY)),
            requests_per_second=float(data.get("requests_per_second", 8.0)),
            burst=int(data.get("burst", 8)),
            timeout_s=float(data.get("timeout_s", 60.0)),
            retry=retry,
        )


class _TokenBucket:
    """Blocking token bucket: at most ``rate`` acquisitions per second after
    an initial burst."""

    def __init__(self, rate: float, burst: int,
                 clock: Callable[[], float] = time.monotonic,
                 sleep: Callable[[float], None] = time.sleep) -> None:
        self._rate = rate
        self._burst = float(burst)
        self._clock = clock
        self._sleep = sleep
        self._tokens = float(burst)
        self._updated = clock()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = self._clock()
                self._tokens = min(self._burst,
                                   self._tokens + (now - self._updated) * self._rate)
                self._updated = now
                if self._tokens >= 1.0:
                    self._tokens -= 1.0
                    return
                wait = (1.0 - self._tokens) / self._rate
            self._sleep(wait)


class HttpProvider:
    """OpenAI-style chat-completions client.

    The API key is read from the environment variable named in the
    settings at call time; a missing variable raises AuthError before any
    request is sent. ``transport`` is injectable for tests.
    """

    def __init__(self, settings: ProviderSettings, *,
                 transport: httpx.BaseTransport | None = None,
                 sleep: Callable[[float], None] = time.sleep) -> None:
        self.settings = settings
        self.model_id = settings.model
        self.max_concurrency = settings.max_concurrency
        self._client = httpx.Client(timeout=settings.timeout_s,
                                    transport=transport)
        self._semaphore = threading.BoundedSemaphore(settings.max_concurrency)
        self._bucket = _TokenBucket(settings.requests_per_second,
                                    settings.burst, sleep=sleep)
        self._sleep = sleep

    def close(self) -> None:
        self._client.close()

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.settings.api_key_env:
            key = os.environ.get(self.settings.api_key_env)
            if not key:
                raise AuthError(f"environment variable "
                                f"{self.settings.api_key_env} is not set")
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def complete(self, request: CompletionRequest) -> CompletionResponse:
        headers = self._headers()
        payload = {
            "model": request.model_id,
            "messages": [
                {"role": "system", "content": request.system_prompt},
                {"role": "user", "content": request.user_prompt},
            ],
            "temperature": request.temperature,
            "max_tokens": request.max_output_tokens,
        }
        policy = self.settings.retry
        last_error: Exception = ProviderError("no attempts made")
        for attempt in range(policy.max_attempts):
            if attempt:
                self._sleep(policy.base_delay_ms / 1000.0 * 2 ** (attempt - 1))
            self._bucket.acquire()
            started = time.monotonic()
            try:
                with self._semaphore:
                    response = self._client.post(self.settings.endpoint,
                                                 json=payload, headers=headers)
            except httpx.TimeoutException as exc:
                last_error = ProviderTimeout(f"request timed out: {exc}")
                log.warning("attempt %d/%d timed out", attempt + 1,
                            policy.max_attempts)
                continue
            except httpx.HTTPError as exc:
                last_error = ProviderError(f"transport failure: {exc}")
                log.warning("attempt %d/%d failed: %s", attempt + 1,
                            policy.max_attempts, exc)
                continue
            status = response.status_code
            if status in (401, 403):
                raise AuthError(f"provider rejected credentials (HTTP {status})")
            if status == 429:
                last_error = RateLimitedError("provider returned HTTP 429")
                log.warning("attempt %d/%d rate-limited", attempt + 1,
                            policy.max_attempts)
                continue
            if status >= 500:
                last_error = ProviderError(f"provider returned HTTP {status}")
                log.warning("attempt %d/%d got HTTP %d", attempt + 1,
                            policy.max_attempts, status)
                continue
            if status != 200:
                raise ProviderError(f"unexpected HTTP {status}: "
                                    f"{response.text[:200]}")
            return self._parse_response(response,
                                        time.monotonic() - started,
                                        request.model_id)
        raise last_error

    @staticmethod
    def _parse_response(response: httpx.Response, latency_s: float,
                        model_id: str) -> CompletionResponse:
        try:
            data = response.json()
            text = data["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise ProviderError(f"malformed completion payload: {exc}") from None
        if not isinstance(text, str):
            raise ProviderError("completion content is not a string")
        usage = data.get("usage") or {}
        token_usage = None
        if isinstance(usage.get("prompt_tokens"), int) \
                and isinstance(usage.get("completion_tokens"), int):
            token_usage = (usage["prompt_tokens"], usage["completion_tokens"])
        return CompletionResponse(text=text,
                                  model_id=data.get("model", model_id),
                                  latency_s=latency_s,
                                  token_usage=token_usage)


def complete(request: CompletionRequest, provider: Any) -> CompletionResponse:
    """Run one completion against any provider object."""
    return provider.complete(request)
