"""Completion providers: a deterministic mock for offline runs and a
retrying HTTP client for a remote model endpoint."""

from __future__ import annotations

import os
import threading
import time
from dataclasses import dataclass

import httpx

from .config import LLMConfig
from .prompting import MOOD_MARKER, NO_DATA_SNAPSHOT


class LLMError(Exception):
    pass


class CredentialError(LLMError):
    pass


class ProtocolError(LLMError):
    pass


class UpstreamUnavailableError(LLMError):
    pass


@dataclass(frozen=True)
class CompletionRequest:
    prompt: str
    max_words: int = 60
    timeout_s: float = 20.0
    idempotency_key: str = ""


MOCK_REPLIES = {
    "Thriving": (
        "Greetings! I am thriving in this cozy environment — temperature and "
        "humidity are spot on and I feel hydrated and energized. Thanks for "
        "checking in."
    ),
    "Thirsty": "I'm feeling a bit thirsty today, could you water me?",
    "Waterlogged": "I've got plenty of water — no more for now, thanks!",
    "Cold": "Brr, it's too cold for me here; could you move me somewhere warmer?",
    "Overheated": "I'm overheating in this spot; some shade or cooler air would be a relief.",
    "DryAir": "The air around me is very dry; a little misting would feel wonderful.",
    "MuggyAir": "The air feels heavy and muggy; I'd love some fresh airflow.",
    "Unknown": "I can't feel my roots right now — my sensors seem quiet.",
}

MOCK_FALLBACK = "I'm here, quietly growing. Ask me how I feel and I'll tell you."


def mock_complete(prompt: str) -> str:
    """Deterministic reply keyed on the mood marker inside the prompt."""
    idx = prompt.find(MOOD_MARKER)
    if idx >= 0:
        rest = prompt[idx + len(MOOD_MARKER):]
        label = rest.split(",", 1)[0].split("\n", 1)[0].strip().rstrip(".")
        if label in MOCK_REPLIES:
            return MOCK_REPLIES[label]
    if NO_DATA_SNAPSHOT in prompt:
        # An Unknown snapshot carries no mood marker, only the no-data line.
        return MOCK_REPLIES["Unknown"]
    return MOCK_FALLBACK


class MockProvider:
    kind = "mock"

    def __init__(self):
        self.last_prompt = None

    def complete(self, req: CompletionRequest) -> str:
        if not req.prompt:
            raise ProtocolError("prompt must be non-empty")
        self.last_prompt = req.prompt
        return mock_complete(req.prompt)


class RemoteProvider:
    """JSON-over-HTTP provider speaking the internal completion shape:
    POST {model, prompt, max_output_words} -> {text}.

    Retries 5xx and transport failures with exponential backoff; 4xx is
    never retried. At most `max_inflight` requests run concurrently.
    """

    kind = "remote"

    def __init__(self, config: LLMConfig, client: httpx.Client = None, sleep=time.sleep):
        if not config.endpoint_url:
            raise ValueError("remote provider requires endpoint_url")
        api_key = os.environ.get(config.api_key_env_name, "")
        if not api_key:
            raise CredentialError(
                f"environment variable {config.api_key_env_name} is not set"
            )
        self._config = config
        self._api_key = api_key
        self._client = client or httpx.Client()
        self._sleep = sleep
        self._inflight = threading.Semaphore(max(1, config.max_inflight))

    def complete(self, req: CompletionRequest) -> str:
        if not req.prompt:
            raise ProtocolError("prompt must be non-empty")
        attempts = self._config.retries + 1
        last_error = None
        with self._inflight:
            for attempt in range(attempts):
                try:
                    resp = self._client.post(
                        self._config.endpoint_url,
                        json={
                            "model": self._config.model_name,
                            "prompt": req.prompt,
                            "max_output_words": req.max_words,
                        },
                        headers={
                            "Authorization": f"Bearer {self._api_key}",
                            "Idempotency-Key": req.idempotency_key,
                        },
                        timeout=req.timeout_s,
                    )
                except httpx.TimeoutException as exc:
                    last_error = exc
                except httpx.TransportError as exc:
                    last_error = exc
                else:
                    if resp.status_code == 200:
                        return self._parse(resp)
                    if resp.status_code in (401, 403):
                        raise CredentialError(f"upstream returned {resp.status_code}")
                    if 400 <= resp.status_code < 500:
                        raise ProtocolError(f"upstream rejected request: {resp.status_code}")
                    last_error = UpstreamUnavailableError(
                        f"upstream returned {resp.status_code}"
                    )
                if attempt < attempts - 1:
                    self._sleep(self._config.backoff_base_ms * (2 ** attempt) / 1000.0)
        raise UpstreamUnavailableError(f"retries exhausted: {last_error}")

    @staticmethod
    def _parse(resp: httpx.Response) -> str:
        try:
            body = resp.json()
        except ValueError as exc:
            raise ProtocolError(f"upstream body is not JSON: {exc}") from exc
        text = body.get("text") if isinstance(body, dict) else None
        if not isinstance(text, str) or not text:
            raise ProtocolError("upstream body missing non-empty 'text'")
        return text


def build_provider(config: LLMConfig):
    if config.kind == "mock":
        return MockProvider()
    if config.kind == "remote":
        return RemoteProvider(config)
    raise ValueError(f"unknown provider kind: {config.kind!r}")
