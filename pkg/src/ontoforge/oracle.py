"""Merge oracles: a chat-completion HTTP client and a table-driven stub.

Both answer one question -- can these two instances be merged? -- with a raw
text response that is then parsed into true/false. The HTTP request body is
a two-message chat: a system instruction pinning the answer format and the
user question naming both instances.
"""

from __future__ import annotations

import json
import os
import string
import time
import urllib.error
import urllib.request
from typing import Optional, Protocol

from ontoforge.errors import OracleError

SYSTEM_MESSAGE = "You only answer with true or false."


def merge_question(a_name: str, b_name: str) -> str:
    return f'Can I merge instances "{a_name}" and "{b_name}"?'


def request_body(a_name: str, b_name: str, model: str = "") -> dict:
    body = {
        "messages": [
            {"role": "system", "content": SYSTEM_MESSAGE},
            {"role": "user", "content": merge_question(a_name, b_name)},
        ]
    }
    if model:
        body["model"] = model
    return body


def parse_verdict(raw_response: str) -> Optional[bool]:
    """Trim, lowercase, strip trailing punctuation; accept only true/false."""
    text = raw_response.strip().lower().rstrip(string.punctuation + " \t\r\n")
    if text == "true":
        return True
    if text == "false":
        return False
    return None


class MergeOracle(Protocol):
    per_call_cost: Optional[float]

    def ask(self, a_name: str, b_name: str) -> tuple[str, float]:
        """Return (raw response text, latency in seconds)."""
        ...


class StubOracle:
    """Table of raw responses keyed by the unordered name pair."""

    def __init__(
        self,
        responses: dict[tuple[str, str], str],
        default: str = "false",
        latency: float = 0.0,
        per_call_cost: Optional[float] = None,
    ):
        self.responses = {tuple(sorted(pair)): raw for pair, raw in responses.items()}
        self.default = default
        self.latency = latency
        self.per_call_cost = per_call_cost

    @classmethod
    def from_file(cls, path) -> "StubOracle":
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        responses = {}
        for key, raw in data.get("pairs", {}).items():
            a, sep, b = key.partition("||")
            if not sep:
                raise OracleError(f"stub table key {key!r} is not '<name>||<name>'")
            responses[(a, b)] = raw
        return cls(
            responses,
            default=data.get("default", "false"),
            latency=float(data.get("latency", 0.0)),
            per_call_cost=data.get("per_call_cost"),
        )

    def ask(self, a_name: str, b_name: str) -> tuple[str, float]:
        key = tuple(sorted((a_name, b_name)))
        return self.responses.get(key, self.default), self.latency


class HttpOracle:
    """Chat-completion endpoint client with bounded retries.

    The API key is read from the environment (never from configuration
    files). The response text is taken from the usual chat-completion shape
    (``choices[0].message.content``), falling back to a top-level ``content``
    field or the raw body.
    """

    def __init__(
        self,
        endpoint: str,
        model: str = "",
        api_key_env: str = "",
        timeout_seconds: float = 30.0,
        retries: int = 2,
        per_call_cost: Optional[float] = None,
        backoff_seconds: float = 0.5,
    ):
        if not endpoint:
            raise OracleError("HTTP oracle requires an endpoint URL")
        self.endpoint = endpoint
        self.model = model
        self.api_key_env = api_key_env
        self.timeout_seconds = timeout_seconds
        self.retries = retries
        self.per_call_cost = per_call_cost
        self.backoff_seconds = backoff_seconds

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        if self.api_key_env:
            key = os.environ.get(self.api_key_env)
            if key:
                headers["Authorization"] = f"Bearer {key}"
        return headers

    def ask(self, a_name: str, b_name: str) -> tuple[str, float]:
        payload = json.dumps(request_body(a_name, b_name, self.model)).encode("utf-8")
        last_error: Optional[Exception] = None
        for attempt in range(self.retries + 1):
            if attempt:
                time.sleep(self.backoff_seconds * (2 ** (attempt - 1)))
            request = urllib.request.Request(
                self.endpoint, data=payload, headers=self._headers(), method="POST"
            )
            started = time.perf_counter()
            try:
                with urllib.request.urlopen(request, timeout=self.timeout_seconds) as resp:
                    body = resp.read()
            except (urllib.error.URLError, TimeoutError, OSError) as exc:
                last_error = exc
                continue
            latency = time.perf_counter() - started
            return _response_text(body), latency
        raise OracleError(
            f"oracle request failed after {self.retries + 1} attempts: {last_error}"
        )


def _response_text(body: bytes) -> str:
    text = body.decode("utf-8", errors="replace")
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        return text
    if isinstance(data, dict):
        choices = data.get("choices")
        if isinstance(choices, list) and choices:
            message = choices[0].get("message", {})
            content = message.get("content")
            if isinstance(content, str):
                return content
        content = data.get("content")
        if isinstance(content, str):
            return content
    return text
