import json
import threading
import time
from concurrent.futures import ThreadPoolExecutor

import httpx
import pytest

from conftest import mock_client, substring_rule
from hdloa.llm import (
    CompletionRequest,
    ConfigurationError,
    HTTPBackend,
    LLMClient,
    MockBackend,
    MockRule,
    MockScript,
    PermanentError,
    ResponseCache,
    ScriptError,
    TransientError,
    TransportError,
    cache_key,
    client_from_config,
    prompt_digest,
)

GOLDEN_KEY_REQUEST = CompletionRequest("text-davinci-003", "Extract the event arguments of giver", 0.0, 1024, ())
GOLDEN_KEY = "3a4a6fb8233636db04d5363a7383911f78a4b718258d9fe16a3cfb207528e249"


def test_request_validation():
    with pytest.raises(ValueError):
        CompletionRequest("m", "")
    with pytest.raises(ValueError):
        CompletionRequest("m", "p", temperature=-0.1)
    with pytest.raises(ValueError):
        CompletionRequest("m", "p", max_tokens=0)
    assert CompletionRequest("m", "p").temperature == 0.0


def test_cache_key_equal_requests():
    a = CompletionRequest("m", "p", 0, 10, ("x",))
    b = CompletionRequest("m", "p", 0.0, 10, ["x"])
    assert cache_key(a) == cache_key(b)


def test_cache_key_temperature_changes_key():
    assert cache_key(CompletionRequest("m", "p", 0)) != cache_key(CompletionRequest("m", "p", 0.7))


@pytest.mark.parametrize("field,value", [("model_id", "n"), ("prompt", "q"), ("max_tokens", 11),
                                         ("stop_sequences", ("y",))])
def test_cache_key_every_field_matters(field, value):
    base = dict(model_id="m", prompt="p", temperature=0.0, max_tokens=10, stop_sequences=("x",))
    changed = {**base, field: value}
    assert cache_key(CompletionRequest(**base)) != cache_key(CompletionRequest(**changed))


def test_cache_key_golden():
    assert cache_key(GOLDEN_KEY_REQUEST) == GOLDEN_KEY


def test_cache_key_no_collisions():
    keys = {cache_key(CompletionRequest("m", f"prompt {i}", (i % 3) / 2, 1 + i % 7)) for i in range(100_000)}
    assert len(keys) == 100_000


def test_mock_substring_rule_returns_text(loa_output):
    client = mock_client([substring_rule("Extract the event arguments of giver", loa_output)])
    result = client.ask("Question: Extract the event arguments of giver, beneficiary ...")
    assert result.text == loa_output and not result.cached and result.backend_id == "mock"


def test_mock_first_rule_wins_and_digest_rule():
    prompt = "hello"
    script = MockScript((MockRule("digest", digest=prompt_digest(prompt)), MockRule("sub", substring="hell")))
    assert script.respond(prompt) == "digest"
    assert script.respond("shell") == "sub"


def test_mock_unmatched_fails_with_digest():
    client = mock_client([], default=None)
    with pytest.raises(ScriptError) as err:
        client.ask("nothing matches")
    assert prompt_digest("nothing matches") in str(err.value)


def test_mock_rule_needs_one_matcher():
    with pytest.raises(ValueError):
        MockRule("x")
    with pytest.raises(ValueError):
        MockRule("x", digest="a", substring="b")


def test_script_from_dict_fail_default():
    script = MockScript.from_dict({"rules": [{"substring": "a", "response": "A"}], "default": "fail"})
    assert script.default is None
    assert MockScript.from_dict({"default": "ok"}).respond("zzz") == "ok"


def test_cache_hit_second_time(tmp_path):
    client = mock_client([], default="out", cache_dir=tmp_path)
    first, second = client.ask("p"), client.ask("p")
    assert first.text == second.text == "out"
    assert not first.cached and second.cached
    assert client.backend.calls == 1
    assert client.hit_rate == 0.5


def test_n_identical_calls_one_backend_call(tmp_path):
    client = mock_client([], default="out", cache_dir=tmp_path)
    for _ in range(10):
        client.ask("same")
    assert client.backend.calls == 1


def test_nonzero_temperature_not_cached(tmp_path):
    client = mock_client([], default="out", cache_dir=tmp_path)
    client.ask("p", temperature=0.7)
    client.ask("p", temperature=0.7)
    assert client.backend.calls == 2
    assert ResponseCache(tmp_path).stats()["entries"] == 0


def test_cache_record_layout(tmp_path):
    client = mock_client([], default="out", cache_dir=tmp_path)
    req = client.request("p")
    client.complete(req)
    record = json.loads((tmp_path / f"{cache_key(req)}.json").read_text())
    assert record["key"] == cache_key(req)
    assert record["request"] == req.to_dict()
    assert record["response"] == "out" and "timestamp" in record


def test_cache_shared_by_two_clients(tmp_path):
    a = mock_client([], default="out", cache_dir=tmp_path)
    b = mock_client([], default="other", cache_dir=tmp_path)
    a.ask("p")
    assert b.ask("p").text == "out" and b.backend.calls == 0


def test_concurrent_cache_writers(tmp_path):
    clients = [mock_client([], default="same", cache_dir=tmp_path) for _ in range(8)]
    with ThreadPoolExecutor(8) as pool:
        texts = list(pool.map(lambda c: c.ask("p").text, clients))
    assert texts == ["same"] * 8
    assert ResponseCache(tmp_path).stats()["entries"] == 1


class FlakyBackend:
    backend_id = "flaky"

    def __init__(self, failures, exc=TransientError):
        self.failures = failures
        self.exc = exc
        self.calls = 0

    def generate(self, request):
        self.calls += 1
        if self.calls <= self.failures:
            raise self.exc("boom")
        return "ok"


def test_retries_transient_with_backoff():
    delays = []
    backend = FlakyBackend(2)
    client = LLMClient(backend, max_retries=3, backoff_base=0.5, sleep=delays.append)
    assert client.ask("p").text == "ok"
    assert backend.calls == 3 and delays == [0.5, 1.0]


def test_retries_exhausted():
    backend = FlakyBackend(10)
    client = LLMClient(backend, max_retries=2, sleep=lambda s: None)
    with pytest.raises(TransportError):
        client.ask("p")
    assert backend.calls == 3


def test_permanent_error_not_retried():
    backend = FlakyBackend(1, PermanentError)
    client = LLMClient(backend, max_retries=5, sleep=lambda s: None)
    with pytest.raises(PermanentError):
        client.ask("p")
    assert backend.calls == 1


class SlowBackend:
    backend_id = "slow"

    def __init__(self):
        self.active = 0
        self.peak = 0
        self.lock = threading.Lock()

    def generate(self, request):
        with self.lock:
            self.active += 1
            self.peak = max(self.peak, self.active)
        time.sleep(0.02)
        with self.lock:
            self.active -= 1
        return request.prompt


def test_in_flight_bound():
    backend = SlowBackend()
    client = LLMClient(backend, max_in_flight=2)
    with ThreadPoolExecutor(8) as pool:
        list(pool.map(lambda i: client.ask(f"p{i}"), range(16)))
    assert backend.peak <= 2
    assert client.requests == 16


def test_mock_call_counter_is_atomic():
    backend = MockBackend(MockScript((), "x"))
    client = LLMClient(backend, max_in_flight=8)
    with ThreadPoolExecutor(8) as pool:
        list(pool.map(lambda i: client.ask(f"p{i}"), range(200)))
    assert backend.calls == 200


def http_backend(monkeypatch, handler, **kwargs):
    monkeypatch.setenv("TEST_KEY", "secret")
    client = httpx.Client(transport=httpx.MockTransport(handler))
    return HTTPBackend("https://example.invalid/v1/completions", "TEST_KEY", client=client, **kwargs)


def test_http_missing_credential(monkeypatch):
    monkeypatch.delenv("NO_SUCH_KEY", raising=False)
    with pytest.raises(ConfigurationError, match="NO_SUCH_KEY"):
        HTTPBackend("https://example.invalid", "NO_SUCH_KEY")


def test_http_request_and_response_path(monkeypatch):
    seen = {}

    def handler(request):
        seen["body"] = json.loads(request.content)
        seen["auth"] = request.headers["authorization"]
        return httpx.Response(200, json={"choices": [{"text": "answer"}]})

    backend = http_backend(monkeypatch, handler)
    assert backend.generate(CompletionRequest("gpt", "hi", 0, 5, ("\n\n",))) == "answer"
    assert seen["body"] == {"model": "gpt", "prompt": "hi", "temperature": 0.0, "max_tokens": 5, "stop": ["\n\n"]}
    assert seen["auth"] == "Bearer secret"


def test_http_custom_response_path(monkeypatch):
    backend = http_backend(monkeypatch, lambda r: httpx.Response(200, json={"output": {"text": "x"}}),
                           response_path="output.text")
    assert backend.generate(CompletionRequest("m", "p")) == "x"


@pytest.mark.parametrize("status,exc", [(429, TransientError), (503, TransientError), (400, PermanentError),
                                        (401, PermanentError)])
def test_http_status_classification(monkeypatch, status, exc):
    backend = http_backend(monkeypatch, lambda r: httpx.Response(status, text="err"))
    with pytest.raises(exc):
        backend.generate(CompletionRequest("m", "p"))


def test_http_timeout_is_transient(monkeypatch):
    def handler(request):
        raise httpx.ReadTimeout("slow", request=request)

    backend = http_backend(monkeypatch, handler)
    with pytest.raises(TransientError):
        backend.generate(CompletionRequest("m", "p"))


def test_http_4xx_never_resent(monkeypatch):
    calls = []

    def handler(request):
        calls.append(1)
        return httpx.Response(404)

    client = LLMClient(http_backend(monkeypatch, handler), max_retries=4, sleep=lambda s: None)
    with pytest.raises(PermanentError):
        client.ask("p")
    assert len(calls) == 1


def test_http_bad_payload_is_permanent(monkeypatch):
    backend = http_backend(monkeypatch, lambda r: httpx.Response(200, json={"nope": 1}))
    with pytest.raises(PermanentError):
        backend.generate(CompletionRequest("m", "p"))


def test_client_from_config(tmp_path):
    script = tmp_path / "s.json"
    script.write_text(json.dumps({"rules": [{"substring": "a", "response": "A"}], "default": "fail"}))
    client = client_from_config({"kind": "mock", "script": str(script), "model_id": "x"}, tmp_path / "cache")
    assert client.ask("abc").text == "A" and client.model_id == "x"
    with pytest.raises(ConfigurationError):
        client_from_config({"kind": "carrier-pigeon"})
    with pytest.raises(ConfigurationError):
        client_from_config({"kind": "mock"})
