import json

import pytest
import requests

from vtok import plan_frame_sampling
from vtok.datagen import CaptionRecord, MockAnnotationClient, build_annotation_request
from vtok.datagen.client import (
    AuthenticationError,
    ClientConfig,
    HttpAnnotationClient,
    HttpStatusError,
    MalformedResponseError,
    NetworkError,
    RequestTimeoutError,
)


def sample_request(category="perception"):
    record = CaptionRecord(video_id="v1", caption="a cat sleeps", duration_s=5.0, source="webvid")
    return build_annotation_request(record, category, plan_frame_sampling(5.0, 16))


class FakeResponse:
    def __init__(self, status, body=None, text=""):
        self.status_code = status
        self._body = body
        self.text = text

    def json(self):
        if self._body is None:
            raise ValueError("not json")
        return self._body


def ok_response(content="{\"question\": \"q\", \"answer\": \"a\"}"):
    return FakeResponse(200, {"choices": [{"message": {"content": content}}]})


class ScriptedSession:
    """Returns (or raises) the scripted outcomes in order, recording calls."""

    def __init__(self, *outcomes):
        self.outcomes = list(outcomes)
        self.calls = []

    def post(self, url, json=None, headers=None, timeout=None):
        self.calls.append({"url": url, "json": json, "headers": headers, "timeout": timeout})
        outcome = self.outcomes.pop(0)
        if isinstance(outcome, Exception):
            raise outcome
        return outcome


def make_client(session, **overrides):
    sleeps = []
    defaults = dict(endpoint_url="https://annotate.example/v1/chat", api_token="tok", max_retries=3)
    defaults.update(overrides)
    client = HttpAnnotationClient(ClientConfig(**defaults), session=session, sleep=sleeps.append)
    return client, sleeps


class TestMockClient:
    def test_fixture_keyed_by_template_and_seed(self):
        client = MockAnnotationClient(seed=1)
        raw = client.send(sample_request("perception"))
        assert json.loads(raw)["fixture_id"] == "P-1"

    def test_deterministic(self):
        client = MockAnnotationClient(seed=7)
        request = sample_request("temporal")
        assert client.send(request) == client.send(request)

    def test_letters_cover_all_categories(self):
        client = MockAnnotationClient(seed=0)
        letters = {
            json.loads(client.send(sample_request(c)))["fixture_id"][0]
            for c in ("perception", "general", "temporal", "reasoning", "formatting")
        }
        assert letters == {"P", "G", "T", "R", "F"}

    def test_responses_parse_as_qa_json(self):
        client = MockAnnotationClient(seed=0)
        body = json.loads(client.send(sample_request("formatting")))
        assert body["question"] and body["answer"]


class TestHttpClient:
    def test_success_returns_content(self):
        session = ScriptedSession(ok_response("hello"))
        client, sleeps = make_client(session)
        assert client.send(sample_request()) == "hello"
        assert len(session.calls) == 1
        assert sleeps == []

    def test_payload_is_chat_completion_shaped(self):
        session = ScriptedSession(ok_response())
        client, _ = make_client(session)
        client.send(sample_request())
        payload = session.calls[0]["json"]
        assert payload["model"] == "gpt-4o"
        assert [m["role"] for m in payload["messages"]] == ["system", "user"]
        assert "temperature" in payload
        assert session.calls[0]["headers"]["Authorization"] == "Bearer tok"

    def test_auth_error_not_retried(self):
        session = ScriptedSession(FakeResponse(401, text="denied"))
        client, sleeps = make_client(session)
        with pytest.raises(AuthenticationError):
            client.send(sample_request())
        assert len(session.calls) == 1
        assert sleeps == []

    def test_timeout_then_success_consumes_one_retry(self):
        session = ScriptedSession(requests.Timeout("too slow"), ok_response("ok"))
        client, sleeps = make_client(session, backoff_base_s=0.25)
        assert client.send(sample_request()) == "ok"
        assert len(session.calls) == 2
        assert sleeps == [0.25]

    def test_connection_error_retried_then_raised(self):
        session = ScriptedSession(*[requests.ConnectionError("down")] * 3)
        client, sleeps = make_client(session, max_retries=2, backoff_base_s=0.5)
        with pytest.raises(NetworkError):
            client.send(sample_request())
        assert len(session.calls) == 3
        assert sleeps == [0.5, 1.0]  # exponential backoff

    def test_retryable_status_exhausts_retries(self):
        session = ScriptedSession(*[FakeResponse(503, text="busy")] * 4)
        client, _ = make_client(session, max_retries=3)
        with pytest.raises(HttpStatusError) as err:
            client.send(sample_request())
        assert err.value.status == 503
        assert len(session.calls) == 4

    def test_non_retryable_status_raises_immediately(self):
        session = ScriptedSession(FakeResponse(404, text="nope"))
        client, sleeps = make_client(session)
        with pytest.raises(HttpStatusError):
            client.send(sample_request())
        assert len(session.calls) == 1
        assert sleeps == []

    def test_timeout_exhausts_retries(self):
        session = ScriptedSession(*[requests.Timeout("slow")] * 2)
        client, _ = make_client(session, max_retries=1)
        with pytest.raises(RequestTimeoutError):
            client.send(sample_request())
        assert len(session.calls) == 2

    def test_malformed_body_raises(self):
        session = ScriptedSession(FakeResponse(200, {"unexpected": True}))
        client, _ = make_client(session)
        with pytest.raises(MalformedResponseError):
            client.send(sample_request())

    def test_config_validation(self):
        with pytest.raises(ValueError, match="endpoint_url"):
            ClientConfig(endpoint_url="")
        with pytest.raises(ValueError, match="max_in_flight"):
            ClientConfig(endpoint_url="x", max_in_flight=0)
