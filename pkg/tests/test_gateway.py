import json
import random
import time

import pytest

from optformkit.gateway import (
    AuthError,
    CacheCorrupt,
    CacheMiss,
    CompletionRequest,
    CompletionResponse,
    HttpProvider,
    MalformedResponse,
    MockProvider,
    ProviderConfig,
    RateLimited,
    ReplayOnlyProvider,
    complete_with_cache,
    replay_lookup,
    replay_store,
    request_hash,
    run_batch,
)

SECRET = "sk-test-secret-key-do-not-leak"


def req(prompt="hello", **kw):
    return CompletionRequest(model_id="test-model", prompt=prompt, **kw)


class FakeResponse:
    def __init__(self, status_code=200, body=None):
        self.status_code = status_code
        self._body = body or {}

    def json(self):
        return self._body


def ok_body(text="hi"):
    return {
        "choices": [{"message": {"content": text}}],
        "usage": {"prompt_tokens": 3, "completion_tokens": 2},
    }


class ScriptedPost:
    """Returns queued responses in order; records calls for assertions."""

    def __init__(self, responses):
        self.responses = list(responses)
        self.calls = []

    def __call__(self, url, headers=None, json=None, timeout=None):
        self.calls.append({"url": url, "headers": headers, "json": json, "timeout": timeout})
        item = self.responses.pop(0)
        if isinstance(item, Exception):
            raise item
        return item


class TestRequestHash:
    def test_stable(self):
        assert request_hash(req()) == request_hash(req())

    def test_sensitive_to_every_field(self):
        base = request_hash(req())
        assert request_hash(req(prompt="other")) != base
        assert request_hash(req(temperature=0.1)) != base
        assert request_hash(req(max_tokens=256)) != base
        assert request_hash(req(system="sys")) != base
        assert request_hash(CompletionRequest(model_id="m2", prompt="hello")) != base

    def test_invalid_requests_rejected(self):
        with pytest.raises(ValueError):
            CompletionRequest(model_id="m", prompt="")
        with pytest.raises(ValueError):
            CompletionRequest(model_id="m", prompt="p", temperature=-1)


class TestMockProvider:
    def test_echo(self):
        provider = MockProvider()
        assert provider.complete(req("echo me")).text == "echo me"

    def test_custom_responder_and_counter(self):
        provider = MockProvider(lambda r: r.prompt.upper())
        assert provider.complete(req("abc")).text == "ABC"
        provider.complete(req("abc"))
        assert provider.calls == 2


class TestHttpProvider:
    def test_missing_key_is_auth_error_before_network(self, monkeypatch):
        monkeypatch.delenv("TEST_API_KEY", raising=False)
        post = ScriptedPost([FakeResponse(200, ok_body())])
        provider = HttpProvider(ProviderConfig(api_key_env="TEST_API_KEY"), post=post)
        with pytest.raises(AuthError):
            provider.complete(req())
        assert post.calls == []

    def test_success(self, monkeypatch):
        monkeypatch.setenv("TEST_API_KEY", SECRET)
        post = ScriptedPost([FakeResponse(200, ok_body("answer"))])
        provider = HttpProvider(ProviderConfig(api_key_env="TEST_API_KEY"), post=post)
        resp = provider.complete(req(system="be terse"))
        assert resp.text == "answer"
        assert resp.prompt_tokens == 3
        sent = post.calls[0]["json"]
        assert sent["messages"][0] == {"role": "system", "content": "be terse"}
        assert sent["messages"][1]["role"] == "user"

    def test_rate_limit_retries_then_succeeds(self, monkeypatch):
        monkeypatch.setenv("TEST_API_KEY", SECRET)
        post = ScriptedPost([FakeResponse(429), FakeResponse(429), FakeResponse(200, ok_body())])
        sleeps = []
        provider = HttpProvider(
            ProviderConfig(api_key_env="TEST_API_KEY", max_retries=3, backoff_base_ms=100),
            post=post, sleep=sleeps.append,
        )
        resp = provider.complete(req())
        assert resp.retries == 2
        assert len(post.calls) == 3
        # backoff delays are non-decreasing
        assert sleeps == sorted(sleeps)

    def test_retries_exhausted(self, monkeypatch):
        monkeypatch.setenv("TEST_API_KEY", SECRET)
        post = ScriptedPost([FakeResponse(429)] * 3)
        provider = HttpProvider(
            ProviderConfig(api_key_env="TEST_API_KEY", max_retries=2), post=post, sleep=lambda s: None
        )
        with pytest.raises(RateLimited):
            provider.complete(req())

    def test_auth_status_not_retried(self, monkeypatch):
        monkeypatch.setenv("TEST_API_KEY", SECRET)
        post = ScriptedPost([FakeResponse(401)])
        provider = HttpProvider(ProviderConfig(api_key_env="TEST_API_KEY"), post=post, sleep=lambda s: None)
        with pytest.raises(AuthError):
            provider.complete(req())
        assert len(post.calls) == 1

    def test_malformed_response(self, monkeypatch):
        monkeypatch.setenv("TEST_API_KEY", SECRET)
        post = ScriptedPost([FakeResponse(200, {"choices": []})])
        provider = HttpProvider(ProviderConfig(api_key_env="TEST_API_KEY"), post=post)
        with pytest.raises(MalformedResponse):
            provider.complete(req())


class TestReplayCache:
    def test_store_then_lookup(self, tmp_path):
        r = req()
        resp = CompletionResponse(text="cached", latency_ms=12, provider="mock")
        replay_store(r, resp, tmp_path)
        assert replay_lookup(r, tmp_path) == resp

    def test_field_change_misses(self, tmp_path):
        r = req()
        replay_store(r, CompletionResponse(text="t"), tmp_path)
        assert replay_lookup(req(temperature=0.1), tmp_path) is None

    def test_tampered_file_is_corrupt(self, tmp_path):
        r = req()
        path = replay_store(r, CompletionResponse(text="genuine"), tmp_path)
        data = json.loads(path.read_text())
        data["response"]["text"] = "tampered"
        path.write_text(json.dumps(data))
        with pytest.raises(CacheCorrupt):
            replay_lookup(r, tmp_path)

    def test_replay_only_provider(self, tmp_path):
        r = req()
        replay_store(r, CompletionResponse(text="stored"), tmp_path)
        provider = ReplayOnlyProvider(tmp_path)
        assert provider.complete(r).text == "stored"
        with pytest.raises(CacheMiss):
            provider.complete(req("uncached"))

    def test_no_key_material_on_disk(self, tmp_path, monkeypatch):
        monkeypatch.setenv("TEST_API_KEY", SECRET)
        post = ScriptedPost([FakeResponse(200, ok_body())])
        provider = HttpProvider(ProviderConfig(api_key_env="TEST_API_KEY"), post=post)
        complete_with_cache(req(), provider, tmp_path)
        for f in tmp_path.iterdir():
            assert SECRET not in f.read_text()


class TestRunBatch:
    def test_order_preserved_with_random_delays(self):
        rng = random.Random(0)
        provider = MockProvider(lambda r: r.prompt, delay_s=0)

        class Jitter(MockProvider):
            def complete(self, request):
                time.sleep(rng.random() * 0.01)
                return super().complete(request)

        jitter = Jitter(lambda r: r.prompt)
        batch = [(f"r{i}", req(f"prompt {i}")) for i in range(10)]
        results = run_batch(batch, jitter, ProviderConfig(max_in_flight=3))
        assert [r.request_id for r in results] == [f"r{i}" for i in range(10)]
        assert [r.response.text for r in results] == [f"prompt {i}" for i in range(10)]

    def test_failure_isolated(self, monkeypatch):
        monkeypatch.delenv("TEST_API_KEY", raising=False)

        class Flaky(MockProvider):
            def complete(self, request):
                if request.prompt == "prompt 5":
                    raise AuthError("boom")
                return super().complete(request)

        batch = [(f"r{i}", req(f"prompt {i}")) for i in range(10)]
        results = run_batch(batch, Flaky(), ProviderConfig(max_in_flight=4))
        errors = [r for r in results if r.error]
        assert len(errors) == 1
        assert errors[0].request_id == "r5"
        assert "AuthError" in errors[0].error

    def test_cached_batch_makes_no_provider_calls(self, tmp_path):
        provider = MockProvider()
        batch = [(f"r{i}", req(f"prompt {i}")) for i in range(100)]
        run_batch(batch, provider, cache_dir=tmp_path)
        assert provider.calls == 100
        again = run_batch(batch, provider, cache_dir=tmp_path)
        assert provider.calls == 100  # all served from cache
        assert [r.response.text for r in again] == [f"prompt {i}" for i in range(100)]

    def test_duplicate_ids_rejected(self):
        with pytest.raises(ValueError):
            run_batch([("a", req("x")), ("a", req("y"))], MockProvider())

    def test_deterministic_when_cached(self, tmp_path):
        batch = [(f"r{i}", req(f"prompt {i}")) for i in range(10)]
        run_batch(batch, MockProvider(), cache_dir=tmp_path)
        a = run_batch(batch, ReplayOnlyProvider(tmp_path), cache_dir=tmp_path)
        b = run_batch(batch, ReplayOnlyProvider(tmp_path), cache_dir=tmp_path)
        assert a == b
