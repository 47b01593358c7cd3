"""Annotation clients: a deterministic mock for tests and a live HTTP client.

The live client speaks the de-facto chat-completion shape, POSTing
``{model, messages, temperature}`` and reading
``response["choices"][0]["message"]["content"]``. Transient failures
(timeouts, connection drops, 429/5xx) retry with exponential backoff;
auth failures surface immediately.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass

import requests

from .annotate import AnnotationRequest

SYSTEM_PROMPT = "You are a helpful visual assistant."
RETRYABLE_STATUSES = frozenset({429, 500, 502, 503, 504})

_FIXTURE_LETTER = {
    "perception": "P",
    "general": "G",
    "temporal": "T",
    "reasoning": "R",
    "formatting": "F",
}

# Fixture question/answer bodies per template; the temporal pair carries
# <Frame N> markers on purpose so downstream normalization is exercised.
_FIXTURE_BODIES = {
    "perception": (
        "Which vehicles are visible and what are they doing?",
        "A red delivery van reverses into a loading bay while a blue tram passes behind it.",
    ),
    "general": (
        "Summarize what this video shows.",
        "A corner bakery opens for the morning: shutters rise, shelves fill, and the first customers arrive.",
    ),
    "temporal": (
        "What changes between <Frame 3> and <Frame 12>?",
        "At <Frame 3> the street is empty; by <Frame 12> a market stall has been assembled at the corner.",
    ),
    "reasoning": (
        "Why does the cyclist stop before the crossing?",
        "The pedestrian light turns green for the crossing crowd, so the cyclist yields until the path clears.",
    ),
    "formatting": (
        "Which object appears first? A. tram B. van C. stall D. bicycle Answer with only one letter",
        "B",
    ),
}


class AnnotationError(Exception):
    """Base class for annotation client failures."""


class AuthenticationError(AnnotationError):
    pass


class RequestTimeoutError(AnnotationError):
    pass


class NetworkError(AnnotationError):
    pass


class HttpStatusError(AnnotationError):
    def __init__(self, status: int, detail: str = ""):
        super().__init__(f"HTTP {status}{': ' + detail if detail else ''}")
        self.status = status


class MalformedResponseError(AnnotationError):
    pass


@dataclass(frozen=True)
class ClientConfig:
    endpoint_url: str
    api_token: str = ""
    model: str = "gpt-4o"
    temperature: float = 0.2
    timeout_s: float = 30.0
    max_retries: int = 3
    backoff_base_s: float = 0.5
    max_in_flight: int = 4

    def __post_init__(self) -> None:
        if not self.endpoint_url:
            raise ValueError("endpoint_url must be set for live annotation")
        if self.max_retries < 0 or self.timeout_s <= 0 or self.backoff_base_s < 0:
            raise ValueError("retry/timeout settings must be non-negative (timeout positive)")
        if self.max_in_flight < 1:
            raise ValueError(f"max_in_flight must be >= 1, got {self.max_in_flight}")


class MockAnnotationClient:
    """Offline stand-in returning fixture responses keyed by (template, seed)."""

    def __init__(self, seed: int = 0):
        self.seed = seed
        self.identity = f"mock:{seed}"

    def fixture_id(self, template_id: str) -> str:
        try:
            letter = _FIXTURE_LETTER[template_id]
        except KeyError:
            raise AnnotationError(f"no fixture for template {template_id!r}") from None
        return f"{letter}-{self.seed}"

    def send(self, request: AnnotationRequest) -> str:
        question, answer = _FIXTURE_BODIES[request.template_id]
        payload = {
            "fixture_id": self.fixture_id(request.template_id),
            "question": question,
            "answer": answer,
        }
        return json.dumps(payload, ensure_ascii=False)


class HttpAnnotationClient:
    """Live chat-completion client with bounded exponential-backoff retries.

    ``session`` and ``sleep`` are injectable so tests can script transports
    and observe backoff without waiting.
    """

    def __init__(self, config: ClientConfig, session=None, sleep=time.sleep):
        self.config = config
        self.session = session if session is not None else requests.Session()
        self.sleep = sleep
        self.identity = config.model

    def _payload(self, request: AnnotationRequest) -> dict:
        return {
            "model": self.config.model,
            "messages": [
                {"role": "system", "content": SYSTEM_PROMPT},
                {"role": "user", "content": request.user_content()},
            ],
            "temperature": self.config.temperature,
        }

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        if self.config.api_token:
            headers["Authorization"] = f"Bearer {self.config.api_token}"
        return headers

    def send(self, request: AnnotationRequest) -> str:
        last_error: AnnotationError | None = None
        for attempt in range(self.config.max_retries + 1):
            try:
                response = self.session.post(
                    self.config.endpoint_url,
                    json=self._payload(request),
                    headers=self._headers(),
                    timeout=self.config.timeout_s,
                )
            except requests.Timeout as exc:
                last_error = RequestTimeoutError(str(exc))
            except requests.ConnectionError as exc:
                last_error = NetworkError(str(exc))
            else:
                status = response.status_code
                if 200 <= status < 300:
                    return self._extract_content(response)
                if status in (401, 403):
                    raise AuthenticationError(f"HTTP {status}: check the API token")
                last_error = HttpStatusError(status, getattr(response, "text", "")[:200])
                if status not in RETRYABLE_STATUSES:
                    raise last_error
            if attempt < self.config.max_retries:
                self.sleep(self.config.backoff_base_s * (2**attempt))
        assert last_error is not None
        raise last_error

    @staticmethod
    def _extract_content(response) -> str:
        try:
            body = response.json()
            content = body["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise MalformedResponseError(f"unexpected response shape: {exc}") from exc
        if not isinstance(content, str):
            raise MalformedResponseError(f"content must be text, got {type(content).__name__}")
        return content
