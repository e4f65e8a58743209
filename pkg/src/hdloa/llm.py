"""Completion client with a scripted mock, an HTTP backend and a response cache."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Protocol, Sequence

logger = logging.getLogger(__name__)

DEFAULT_MAX_TOKENS = 1024


class LLMError(RuntimeError):
    pass


class ConfigurationError(LLMError):
    pass


class ScriptError(LLMError):
    """The mock script has no response for a prompt."""


class TransientError(LLMError):
    """Failure worth retrying: timeouts, resets, 429 and 5xx."""


class PermanentError(LLMError):
    """Failure that must not be retried (4xx other than 429, bad payloads)."""


class TransportError(LLMError):
    """Retries exhausted."""


@dataclass(frozen=True)
class CompletionRequest:
    model_id: str
    prompt: str
    temperature: float = 0.0
    max_tokens: int = DEFAULT_MAX_TOKENS
    stop_sequences: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.prompt:
            raise ValueError("prompt must be non-empty")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be > 0")
        object.__setattr__(self, "temperature", float(self.temperature))
        object.__setattr__(self, "stop_sequences", tuple(self.stop_sequences))

    def to_dict(self) -> dict:
        return {
            "model_id": self.model_id,
            "prompt": self.prompt,
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
            "stop_sequences": list(self.stop_sequences),
        }


@dataclass(frozen=True)
class CompletionResult:
    text: str
    cached: bool
    backend_id: str
    latency_ms: int = 0


def prompt_digest(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


def cache_key(request: CompletionRequest) -> str:
    """SHA-256 over a canonical JSON encoding of every request field."""
    payload = json.dumps(request.to_dict(), sort_keys=True, ensure_ascii=False, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class ResponseCache:
    """One JSON file per cache key.

    Writes go through a temp file and ``os.replace`` so readers never see a
    partial record; concurrent writers of one key write identical content.
    """

    def __init__(self, directory):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def _path(self, key: str) -> Path:
        return self.directory / f"{key}.json"

    def get(self, key: str) -> Optional[dict]:
        try:
            with open(self._path(key), encoding="utf-8") as fh:
                return json.load(fh)
        except FileNotFoundError:
            return None
        except json.JSONDecodeError:
            logger.warning("ignoring corrupt cache record %s", key)
            return None

    def put(self, key: str, request: CompletionRequest, text: str) -> None:
        record = {"key": key, "request": request.to_dict(), "response": text, "timestamp": time.time()}
        fd, tmp = tempfile.mkstemp(dir=self.directory, prefix=".tmp-", suffix=".json")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                json.dump(record, fh, ensure_ascii=False)
            os.replace(tmp, self._path(key))
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    def stats(self) -> dict:
        files = list(self.directory.glob("*.json"))
        return {
            "directory": str(self.directory),
            "entries": len(files),
            "bytes": sum(f.stat().st_size for f in files),
        }


class Backend(Protocol):
    backend_id: str

    def generate(self, request: CompletionRequest) -> str: ...


@dataclass(frozen=True)
class MockRule:
    response: str
    digest: Optional[str] = None
    substring: Optional[str] = None

    def __post_init__(self):
        if (self.digest is None) == (self.substring is None):
            raise ValueError("a mock rule needs exactly one of digest or substring")

    def matches(self, prompt: str, digest: str) -> bool:
        if self.digest is not None:
            return self.digest == digest
        return self.substring in prompt


@dataclass(frozen=True)
class MockScript:
    """Ordered rules; the first match wins. ``default=None`` means fail."""

    rules: tuple[MockRule, ...] = ()
    default: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))

    def respond(self, prompt: str) -> str:
        digest = prompt_digest(prompt)
        for rule in self.rules:
            if rule.matches(prompt, digest):
                return rule.response
        if self.default is None:
            raise ScriptError(f"no mock rule matches prompt digest {digest}")
        return self.default

    @classmethod
    def from_dict(cls, d: dict) -> "MockScript":
        rules = [MockRule(r["response"], r.get("digest"), r.get("substring")) for r in d.get("rules", [])]
        default = d.get("default")
        return cls(tuple(rules), None if default == "fail" else default)

    @classmethod
    def from_file(cls, path) -> "MockScript":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


class MockBackend:
    """Deterministic backend driven by a :class:`MockScript`."""

    backend_id = "mock"

    def __init__(self, script: MockScript):
        self.script = script
        self._calls = 0
        self._lock = threading.Lock()

    @property
    def calls(self) -> int:
        return self._calls

    def generate(self, request: CompletionRequest) -> str:
        with self._lock:
            self._calls += 1
        return self.script.respond(request.prompt)


def _extract_path(payload, path: str):
    node = payload
    for part in path.split("."):
        if isinstance(node, list):
            node = node[int(part)]
        else:
            node = node[part]
    return node


class HTTPBackend:
    """Completion-style HTTP endpoint (OpenAI ``/v1/completions`` shaped by default).

    The request body is ``{"model", "prompt", "temperature", "max_tokens",
    "stop"}``; the response text is read from ``response_path``.
    """

    def __init__(
        self,
        endpoint: str,
        api_key_env: str = "OPENAI_API_KEY",
        response_path: str = "choices.0.text",
        timeout: float = 60.0,
        client=None,
    ):
        import httpx

        key = os.environ.get(api_key_env)
        if not key:
            raise ConfigurationError(f"environment variable {api_key_env} is not set")
        self.endpoint = endpoint
        self.response_path = response_path
        self.backend_id = f"http:{endpoint}"
        self._httpx = httpx
        self._client = client or httpx.Client(timeout=timeout)
        self._headers = {"Authorization": f"Bearer {key}"}

    def generate(self, request: CompletionRequest) -> str:
        httpx = self._httpx
        body = {
            "model": request.model_id,
            "prompt": request.prompt,
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        if request.stop_sequences:
            body["stop"] = list(request.stop_sequences)
        try:
            resp = self._client.post(self.endpoint, json=body, headers=self._headers)
        except (httpx.TimeoutException, httpx.TransportError) as exc:
            raise TransientError(f"{type(exc).__name__}: {exc}") from exc
        if resp.status_code == 429 or resp.status_code >= 500:
            raise TransientError(f"HTTP {resp.status_code}")
        if resp.status_code >= 400:
            raise PermanentError(f"HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            return str(_extract_path(resp.json(), self.response_path))
        except (KeyError, IndexError, ValueError, TypeError) as exc:
            raise PermanentError(f"response has no field {self.response_path!r}") from exc


@dataclass
class LLMClient:
    """Cached, retrying, concurrency-bounded front end over a backend.

    Only temperature-0 requests are cached, since other temperatures are
    not expected to be reproducible.
    """

    backend: Backend
    model_id: str = "mock-model"
    cache: Optional[ResponseCache] = None
    max_retries: int = 3
    backoff_base: float = 0.5
    max_in_flight: int = 4
    max_tokens: int = DEFAULT_MAX_TOKENS
    stop_sequences: Sequence[str] = ()
    sleep: Callable[[float], None] = time.sleep
    _semaphore: threading.BoundedSemaphore = field(init=False, repr=False)
    _stats_lock: threading.Lock = field(init=False, repr=False)

    def __post_init__(self):
        if self.max_in_flight < 1:
            raise ValueError("max_in_flight must be >= 1")
        self._semaphore = threading.BoundedSemaphore(self.max_in_flight)
        self._stats_lock = threading.Lock()
        self.requests = 0
        self.cache_hits = 0

    def request(self, prompt: str, temperature: float = 0.0) -> CompletionRequest:
        return CompletionRequest(self.model_id, prompt, temperature, self.max_tokens, tuple(self.stop_sequences))

    def ask(self, prompt: str, temperature: float = 0.0) -> CompletionResult:
        return self.complete(self.request(prompt, temperature))

    def complete(self, request: CompletionRequest) -> CompletionResult:
        use_cache = self.cache is not None and request.temperature == 0
        key = cache_key(request) if use_cache else None
        with self._stats_lock:
            self.requests += 1
        if use_cache:
            record = self.cache.get(key)
            if record is not None:
                with self._stats_lock:
                    self.cache_hits += 1
                return CompletionResult(record["response"], True, self.backend.backend_id, 0)

        start = time.monotonic()
        text = self._call_with_retries(request)
        latency = int((time.monotonic() - start) * 1000)
        if use_cache:
            self.cache.put(key, request, text)
        return CompletionResult(text, False, self.backend.backend_id, latency)

    def _call_with_retries(self, request: CompletionRequest) -> str:
        last_error = None
        for attempt in range(self.max_retries + 1):
            if attempt:
                delay = self.backoff_base * 2 ** (attempt - 1)
                logger.info("retry %d/%d after %.2fs: %s", attempt, self.max_retries, delay, last_error)
                self.sleep(delay)
            try:
                with self._semaphore:
                    return self.backend.generate(request)
            except TransientError as exc:
                last_error = exc
        raise TransportError(f"gave up after {self.max_retries + 1} attempts: {last_error}")

    @property
    def hit_rate(self) -> float:
        return self.cache_hits / self.requests if self.requests else 0.0


def client_from_config(cfg: dict, cache_dir=None) -> LLMClient:
    """Build a client from a backend config dict.

    ``{"kind": "mock", "script": "path.json"}`` or
    ``{"kind": "http", "endpoint": ..., "api_key_env": ..., "response_path": ...}``;
    shared keys: model_id, max_retries, max_in_flight, max_tokens, stop_sequences.
    """
    kind = cfg.get("kind", "mock")
    if kind == "mock":
        if "script" in cfg:
            script = MockScript.from_file(cfg["script"]) if isinstance(cfg["script"], str) \
                else MockScript.from_dict(cfg["script"])
        else:
            raise ConfigurationError("mock backend needs a 'script'")
        backend = MockBackend(script)
    elif kind == "http":
        if "endpoint" not in cfg:
            raise ConfigurationError("http backend needs an 'endpoint'")
        backend = HTTPBackend(
            cfg["endpoint"],
            cfg.get("api_key_env", "OPENAI_API_KEY"),
            cfg.get("response_path", "choices.0.text"),
            cfg.get("timeout", 60.0),
        )
    else:
        raise ConfigurationError(f"unknown backend kind {kind!r}")
    return LLMClient(
        backend,
        model_id=cfg.get("model_id", "mock-model"),
        cache=ResponseCache(cache_dir) if cache_dir else None,
        max_retries=cfg.get("max_retries", 3),
        max_in_flight=cfg.get("max_in_flight", 4),
        max_tokens=cfg.get("max_tokens", DEFAULT_MAX_TOKENS),
        stop_sequences=tuple(cfg.get("stop_sequences", ())),
    )
