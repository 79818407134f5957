"""Policy interface: prompt construction plus a backend call."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Protocol

from ..pdl import PdlDocument
from .backends import GenParams, LlmBackend
from .prompts import render_agent_prompt
from ..state import SessionState
from .tools import ToolRegistry


class Policy(Protocol):
    agent_kind: str

    def propose(self, state: SessionState, guidance: Iterable, scratch: Iterable[str]) -> str:
        """Return the raw policy output for the current decision point."""
        ...


@dataclass
class PdlAgentPolicy:
    """Controller-guided agent: full PDL in the prompt plus current state."""

    doc: PdlDocument
    registry: ToolRegistry
    backend: LlmBackend
    params: GenParams = field(default_factory=GenParams)
    agent_kind: str = "flowagent"

    def propose(self, state: SessionState, guidance: Iterable, scratch: Iterable[str]) -> str:
        prompt = render_agent_prompt(
            self.doc,
            state,
            guidance,
            scratch,
            api_descriptions=self.registry.descriptions(),
        )
        return self.backend.complete(prompt, self.params)
