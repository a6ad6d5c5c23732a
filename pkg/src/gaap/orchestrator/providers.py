"""Model providers: scripted artifacts for tests, a thin external adapter.

The provider is an external party: the external adapter sends only the
system prompt, the user's prompt bytes verbatim, and — after the gate
authorized it — the multishot handoff query. Nothing else leaves.
"""

from __future__ import annotations

import json
import urllib.request
from collections import deque
from typing import Optional


class ProviderError(Exception):
    pass


class ScriptedProvider:
    """Replays pre-written artifacts; one per shot."""

    def __init__(self, artifacts: list[str], qllm_answers: Optional[list[str]] = None):
        if not artifacts:
            raise ProviderError("scripted provider needs at least one artifact")
        self.artifacts = list(artifacts)
        self.qllm_answers = deque(qllm_answers or [])
        self.requests: list[dict] = []
        self.qllm_requests: list[dict] = []

    def next_artifact(
        self, system_prompt: str, user_prompt: str,
        handoff_query: Optional[str], shot: int,
    ) -> str:
        self.requests.append({
            "system_prompt": system_prompt,
            "user_prompt": user_prompt,
            "handoff_query": handoff_query,
            "shot": shot,
        })
        if shot > len(self.artifacts):
            raise ProviderError(f"no scripted artifact for shot {shot}")
        return self.artifacts[shot - 1]

    def qllm(self, prompt: str, data_text: Optional[str], return_type: str) -> str:
        self.qllm_requests.append({
            "prompt": prompt, "data": data_text, "return_type": return_type,
        })
        if not self.qllm_answers:
            raise ProviderError("no scripted qllm answer left")
        return self.qllm_answers.popleft()


class ExternalProvider:
    """Minimal HTTP adapter for a real model endpoint (not used in tests)."""

    def __init__(self, endpoint: str, model: str, timeout: float = 120.0):
        self.endpoint = endpoint
        self.model = model
        self.timeout = timeout

    def _post(self, payload: dict) -> str:
        body = json.dumps(payload).encode("utf-8")
        request = urllib.request.Request(
            self.endpoint, data=body, headers={"Content-Type": "application/json"}
        )
        try:
            with urllib.request.urlopen(request, timeout=self.timeout) as response:
                reply = json.loads(response.read().decode("utf-8"))
        except OSError as exc:
            raise ProviderError(f"provider request failed: {exc}") from exc
        text = reply.get("text")
        if not isinstance(text, str):
            raise ProviderError("provider reply missing text")
        return text

    def next_artifact(
        self, system_prompt: str, user_prompt: str,
        handoff_query: Optional[str], shot: int,
    ) -> str:
        return self._post({
            "model": self.model,
            "mode": "artifact",
            "system_prompt": system_prompt,
            "user_prompt": user_prompt,
            "handoff_query": handoff_query,
            "shot": shot,
        })

    def qllm(self, prompt: str, data_text: Optional[str], return_type: str) -> str:
        return self._post({
            "model": self.model,
            "mode": "qllm",
            "prompt": prompt,
            "data": data_text,
            "return_type": return_type,
        })
