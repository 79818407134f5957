"""LLM backends: an OpenAI-compatible HTTP client and a scripted stand-in."""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Protocol, Union

import httpx

DEFAULT_TEMPERATURE = 0.2

Prompt = Union[str, list[dict]]


@dataclass(frozen=True)
class GenParams:
    temperature: float = DEFAULT_TEMPERATURE
    max_tokens: int = 1024


class BackendError(RuntimeError):
    """The backend failed to produce a completion."""


class LlmBackend(Protocol):
    identity: str

    def complete(self, prompt: Prompt, params: Optional[GenParams] = None) -> str: ...


class ScriptedBackend:
    """Returns a fixed response sequence; deterministic given the call order.

    After the list is exhausted the `default` response is returned, if set;
    otherwise the backend raises BackendError. An optional per-call delay
    supports testing in-flight turn handling.
    """

    def __init__(self, responses: Optional[list[str]] = None, default: Optional[str] = None, delay_s: float = 0.0):
        self.responses = list(responses or [])
        self.default = default
        self.delay_s = delay_s
        self.calls = 0
        self.identity = "scripted"

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "ScriptedBackend":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        if isinstance(data, list):
            return cls(responses=data)
        return cls(
            responses=data.get("responses"),
            default=data.get("default"),
            delay_s=float(data.get("delay_s", 0.0)),
        )

    def complete(self, prompt: Prompt, params: Optional[GenParams] = None) -> str:
        if self.delay_s:
            time.sleep(self.delay_s)
        index = self.calls
        self.calls += 1
        if index < len(self.responses):
            return self.responses[index]
        if self.default is not None:
            return self.default
        raise BackendError(f"scripted backend exhausted after {len(self.responses)} responses")


class OpenAICompatBackend:
    """Chat-completions client for any OpenAI-compatible endpoint.

    Credentials come from the environment: OPENAI_API_KEY (or the variable
    named by `api_key_env`), with the base URL from OPENAI_BASE_URL unless
    given explicitly.
    """

    def __init__(
        self,
        model: str,
        base_url: Optional[str] = None,
        api_key: Optional[str] = None,
        api_key_env: str = "OPENAI_API_KEY",
        timeout_s: float = 60.0,
        max_attempts: int = 3,
    ):
        self.model = model
        self.base_url = (base_url or os.environ.get("OPENAI_BASE_URL", "https://api.openai.com/v1")).rstrip("/")
        self.api_key = api_key or os.environ.get(api_key_env, "")
        self.timeout_s = timeout_s
        self.max_attempts = max_attempts
        self.identity = model

    def complete(self, prompt: Prompt, params: Optional[GenParams] = None) -> str:
        params = params or GenParams()
        messages = [{"role": "user", "content": prompt}] if isinstance(prompt, str) else prompt
        body = {
            "model": self.model,
            "messages": messages,
            "temperature": params.temperature,
            "max_tokens": params.max_tokens,
        }
        headers = {"Authorization": f"Bearer {self.api_key}"} if self.api_key else {}
        last_error: Optional[Exception] = None
        for _ in range(self.max_attempts):
            try:
                response = httpx.post(
                    f"{self.base_url}/chat/completions",
                    json=body,
                    headers=headers,
                    timeout=self.timeout_s,
                )
                response.raise_for_status()
                data = response.json()
                return data["choices"][0]["message"]["content"]
            except (httpx.HTTPError, KeyError, IndexError, ValueError) as exc:
                last_error = exc
        raise BackendError(f"chat completion failed after {self.max_attempts} attempts: {last_error}")


def backend_from_spec(spec: Union[str, dict, LlmBackend, None]) -> Optional[LlmBackend]:
    """Build a backend from a CLI/config spec.

    String forms: "scripted:<path>" or "openai:<model>". Dict forms use a
    "kind" discriminator and pass the remaining keys to the constructor.
    """
    if spec is None:
        return None
    if not isinstance(spec, (str, dict)):
        return spec  # already a backend
    if isinstance(spec, str):
        kind, _, rest = spec.partition(":")
        if kind == "scripted":
            if not rest:
                raise ValueError("scripted backend spec needs a file path: scripted:<path>")
            return ScriptedBackend.from_file(rest)
        if kind == "openai":
            return OpenAICompatBackend(model=rest or "gpt-4o")
        raise ValueError(f"unknown backend spec {spec!r}")
    kind = spec.get("kind")
    if kind == "scripted":
        return ScriptedBackend(
            responses=spec.get("responses"),
            default=spec.get("default"),
            delay_s=float(spec.get("delay_s", 0.0)),
        )
    if kind == "scripted_file":
        return ScriptedBackend.from_file(spec["path"])
    if kind == "openai":
        return OpenAICompatBackend(
            model=spec.get("model", "gpt-4o"),
            base_url=spec.get("base_url"),
            api_key_env=spec.get("api_key_env", "OPENAI_API_KEY"),
        )
    raise ValueError(f"unknown backend kind {kind!r}")
