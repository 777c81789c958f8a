"""Chat-completion provider contract with remote, scripted, and replay
implementations.

The scripted provider plays back an ordered response list, which makes
every engine deterministic and testable offline; the replay provider is
the same thing fed from a recorded transcript.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import requests

from .errors import ProviderError

Message = dict  # {"role": ..., "content": ...}


class ChatProvider(Protocol):
    def complete(self, messages: list[Message]) -> str: ...


@dataclass
class ScriptedProvider:
    """Plays back canned responses in order; records every call."""

    responses: list[str]
    calls: list[list[Message]] = field(default_factory=list)
    _cursor: int = 0

    @classmethod
    def from_file(cls, path) -> "ScriptedProvider":
        # Fixture format: responses separated by a line of three dashes.
        text = Path(path).read_text(encoding="utf-8")
        return cls(responses=[r.strip() for r in text.split("\n---\n")])

    def complete(self, messages: list[Message]) -> str:
        self.calls.append(messages)
        if self._cursor >= len(self.responses):
            raise ProviderError("scripted provider exhausted its response list")
        response = self.responses[self._cursor]
        self._cursor += 1
        return response


@dataclass
class RemoteChatProvider:
    """OpenAI-style chat completions over HTTP with bounded retries."""

    model: str = ""
    endpoint: str = ""
    timeout: float = 120.0
    max_retries: int = 2

    def complete(self, messages: list[Message]) -> str:
        endpoint = self.endpoint or os.environ.get("LLM_ENDPOINT", "")
        model = self.model or os.environ.get("LLM_MODEL", "")
        api_key = os.environ.get("LLM_API_KEY", "")
        headers = {"Content-Type": "application/json"}
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        last_error = None
        for attempt in range(self.max_retries + 1):
            try:
                resp = requests.post(
                    endpoint,
                    json={"model": model, "messages": messages, "temperature": 0},
                    headers=headers,
                    timeout=self.timeout,
                )
                if resp.status_code >= 500:
                    last_error = ProviderError(f"chat endpoint returned {resp.status_code}", status=resp.status_code)
                    time.sleep(min(2**attempt * 0.25, 4.0))
                    continue
                if resp.status_code != 200:
                    raise ProviderError(f"chat endpoint returned {resp.status_code}", status=resp.status_code)
                return resp.json()["choices"][0]["message"]["content"]
            except (requests.RequestException, KeyError, IndexError) as exc:
                last_error = exc
                time.sleep(min(2**attempt * 0.25, 4.0))
        raise ProviderError(f"chat request failed after retries: {last_error}")
