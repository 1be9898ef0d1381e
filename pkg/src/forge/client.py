"""Chat-completion client with retries, exponential backoff, and a
process-wide in-flight cap per configuration."""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass

import requests

from .errors import ConfigError, ProtocolError, TransportError

RETRYABLE_STATUS = (429, 500, 502, 503, 504)


@dataclass(frozen=True)
class ClientConfig:
    base_url: str
    model_name: str
    temperature: float = 0.7
    max_tokens: int = 2048
    max_retries: int = 3
    backoff_base: float = 0.25
    max_parallel: int = 4
    api_key_env: str = "FORGE_API_KEY"
    timeout: float = 60.0

    def __post_init__(self):
        if self.max_parallel < 1:
            raise ConfigError("max_parallel must be >= 1")
        if self.temperature < 0:
            raise ConfigError("temperature must be >= 0")
        if self.max_retries < 0:
            raise ConfigError("max_retries must be >= 0")


_semaphores: dict[ClientConfig, threading.Semaphore] = {}
_semaphores_lock = threading.Lock()


def _semaphore_for(config: ClientConfig) -> threading.Semaphore:
    with _semaphores_lock:
        sem = _semaphores.get(config)
        if sem is None:
            sem = threading.Semaphore(config.max_parallel)
            _semaphores[config] = sem
        return sem


def request_completion(prompt: str, config: ClientConfig,
                       sleep=time.sleep) -> str:
    """POST the prompt to {base_url}/chat/completions and return the
    assistant message content.

    Transient failures (HTTP 429/5xx, timeouts, connection errors) are
    retried up to max_retries times with exponential backoff
    (backoff_base * 2^attempt). At most max_parallel requests per config are
    in flight across the whole process. A well-formed HTTP response that does
    not carry choices[0].message.content is a ProtocolError, not retried.
    """
    url = config.base_url.rstrip("/") + "/chat/completions"
    payload = {
        "model": config.model_name,
        "messages": [{"role": "user", "content": prompt}],
        "temperature": config.temperature,
        "max_tokens": config.max_tokens,
    }
    headers = {"Content-Type": "application/json"}
    api_key = os.environ.get(config.api_key_env, "")
    if api_key:
        headers["Authorization"] = f"Bearer {api_key}"

    sem = _semaphore_for(config)
    last_error: Exception | None = None
    for attempt in range(config.max_retries + 1):
        if attempt:
            sleep(config.backoff_base * 2 ** (attempt - 1))
        try:
            with sem:
                response = requests.post(
                    url, json=payload, headers=headers, timeout=config.timeout)
        except (requests.Timeout, requests.ConnectionError) as exc:
            last_error = exc
            continue
        if response.status_code in RETRYABLE_STATUS:
            last_error = TransportError(
                f"HTTP {response.status_code} from {url}")
            continue
        if response.status_code != 200:
            raise TransportError(
                f"HTTP {response.status_code} from {url}: {response.text[:200]}")
        try:
            body = response.json()
        except (json.JSONDecodeError, ValueError) as exc:
            raise ProtocolError(f"response body is not JSON: {exc}") from exc
        try:
            content = body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ProtocolError(
                "response missing choices[0].message.content") from exc
        if not isinstance(content, str):
            raise ProtocolError("message content is not a string")
        return content

    raise TransportError(
        f"retries exhausted after {config.max_retries + 1} attempts: {last_error}")
