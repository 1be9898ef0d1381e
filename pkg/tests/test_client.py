from __future__ import annotations

import threading
import time

import pytest

from forge.client import ClientConfig, request_completion
from forge.errors import ConfigError, ProtocolError, TransportError
from stub_server import StubChatServer, chat_payload


def config_for(server, **kw):
    defaults = dict(base_url=server.base_url, model_name="stub",
                    max_retries=2, backoff_base=0.01, max_parallel=4,
                    timeout=5.0)
    defaults.update(kw)
    return ClientConfig(**defaults)


class TestRequestCompletion:
    def test_passthrough(self):
        with StubChatServer() as server:
            assert request_completion("hi", config_for(server)) == "hello"

    def test_request_body_shape(self):
        with StubChatServer() as server:
            config = config_for(server, temperature=0.3, max_tokens=77)
            request_completion("ping", config)
            body = server.requests[0]["body"]
            assert body["model"] == "stub"
            assert body["messages"] == [{"role": "user", "content": "ping"}]
            assert body["temperature"] == 0.3
            assert body["max_tokens"] == 77

    def test_bearer_token_from_env(self, monkeypatch):
        monkeypatch.setenv("FORGE_TEST_KEY", "sekret")
        with StubChatServer() as server:
            config = config_for(server, api_key_env="FORGE_TEST_KEY")
            request_completion("hi", config)
            assert server.requests[0]["headers"].get("Authorization") == "Bearer sekret"

    def test_429_then_200_takes_two_attempts(self):
        def behavior(prompt, index):
            if index == 0:
                return 429, {"error": "slow down"}
            return chat_payload("recovered")

        with StubChatServer(behavior) as server:
            assert request_completion("hi", config_for(server)) == "recovered"
            assert len(server.requests) == 2

    def test_retries_exhausted_is_transport_error(self):
        with StubChatServer(lambda p, i: (503, {"err": 1})) as server:
            config = config_for(server, max_retries=2)
            with pytest.raises(TransportError):
                request_completion("hi", config)
            assert len(server.requests) == 3  # initial + 2 retries

    def test_exponential_backoff_delays(self):
        sleeps = []
        with StubChatServer(lambda p, i: (500, {})) as server:
            config = config_for(server, max_retries=3, backoff_base=0.5)
            with pytest.raises(TransportError):
                request_completion("hi", config, sleep=sleeps.append)
        assert sleeps == [0.5, 1.0, 2.0]

    def test_invalid_json_body_is_protocol_error(self):
        with StubChatServer(lambda p, i: (200, b"this is not json")) as server:
            with pytest.raises(ProtocolError):
                request_completion("hi", config_for(server))

    def test_missing_content_field_is_protocol_error(self):
        with StubChatServer(lambda p, i: {"choices": [{"message": {}}]}) as server:
            with pytest.raises(ProtocolError):
                request_completion("hi", config_for(server))

    def test_protocol_error_not_retried(self):
        with StubChatServer(lambda p, i: {"nope": True}) as server:
            with pytest.raises(ProtocolError):
                request_completion("hi", config_for(server))
            assert len(server.requests) == 1

    def test_non_retryable_status_fails_fast(self):
        with StubChatServer(lambda p, i: (400, {"error": "bad request"})) as server:
            with pytest.raises(TransportError):
                request_completion("hi", config_for(server))
            assert len(server.requests) == 1

    def test_connection_refused_retries_then_fails(self):
        config = ClientConfig(base_url="http://127.0.0.1:9", model_name="stub",
                              max_retries=1, backoff_base=0.01, timeout=0.5)
        with pytest.raises(TransportError):
            request_completion("hi", config)


class TestBoundedConcurrency:
    def test_in_flight_never_exceeds_max_parallel(self):
        def slow(prompt, index):
            time.sleep(0.05)
            return chat_payload("ok")

        with StubChatServer(slow) as server:
            config = config_for(server, max_parallel=2)
            threads = [threading.Thread(
                target=request_completion, args=("x", config))
                for _ in range(8)]
            for t in threads:
                t.start()
            for t in threads:
                t.join()
            assert len(server.requests) == 8
            assert server.max_in_flight <= 2


class TestClientConfig:
    def test_invariants(self):
        with pytest.raises(ConfigError):
            ClientConfig(base_url="http://x", model_name="m", max_parallel=0)
        with pytest.raises(ConfigError):
            ClientConfig(base_url="http://x", model_name="m", temperature=-1)
