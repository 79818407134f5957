"""Per-session dialogue state."""

from __future__ import annotations

import uuid
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

from .pdl import DependencyGraph, PdlDocument, build_dependency_graph
from .actions import (
    Action,
    BotResponse,
    ToolCall,
    ToolResult,
    UserMessage,
    canonical_args,
    is_error_payload,
)


@dataclass(frozen=True)
class WorkflowBundle:
    doc: PdlDocument
    graph: DependencyGraph

    @classmethod
    def from_doc(cls, doc: PdlDocument) -> "WorkflowBundle":
        return cls(doc=doc, graph=build_dependency_graph(doc))


@dataclass
class SessionState:
    """Full history plus the executed-node record for one conversation.

    `history` holds the user-visible actions only (user messages, bot
    responses, tool calls and results); controller feedback lives in the
    event log. `executed` is a multiset: node name -> successful runs.
    """

    workflow: WorkflowBundle
    session_id: str = field(default_factory=lambda: uuid.uuid4().hex[:12])
    history: list[Action] = field(default_factory=list)
    executed: Counter = field(default_factory=Counter)
    user_turns: int = 0
    clock: int = 0

    def add_user_message(self, text: str, oow: Optional[tuple[str, Optional[str]]] = None) -> UserMessage:
        message = UserMessage(text=text, oow=oow)
        self.history.append(message)
        self.user_turns += 1
        self.clock += 1
        return message

    def executed_set(self) -> frozenset[str]:
        return frozenset(name for name, count in self.executed.items() if count > 0)

    def last_action(self) -> Optional[Action]:
        return self.history[-1] if self.history else None

    def identical_call_count(self, name: str, canonical: str) -> int:
        return sum(
            1
            for action in self.history
            if isinstance(action, ToolCall) and action.name == name and canonical_args(action.args) == canonical
        )


def replay_executed(history) -> Counter:
    """Recompute the executed multiset by folding over an action sequence."""
    executed: Counter = Counter()
    pending_call: Optional[ToolCall] = None
    for action in history:
        if isinstance(action, ToolCall):
            pending_call = action
        elif isinstance(action, ToolResult):
            if pending_call is not None and pending_call.name == action.name and not is_error_payload(action.payload):
                executed[action.name] += 1
            pending_call = None
        elif isinstance(action, BotResponse):
            if action.answer_node:
                executed[action.answer_node] += 1
    return executed


def count_dependency_violations(history, graph: DependencyGraph) -> int:
    """Successful executions whose preconditions were unmet at that moment."""
    executed: Counter = Counter()
    violations = 0
    pending_call: Optional[ToolCall] = None
    for action in history:
        if isinstance(action, ToolCall):
            pending_call = action
        elif isinstance(action, ToolResult):
            success = (
                pending_call is not None
                and pending_call.name == action.name
                and not is_error_payload(action.payload)
            )
            if success:
                done = frozenset(n for n, c in executed.items() if c > 0)
                if action.name in graph.nodes and not graph.preconditions(action.name) <= done:
                    violations += 1
                executed[action.name] += 1
            pending_call = None
        elif isinstance(action, BotResponse) and action.answer_node:
            done = frozenset(n for n, c in executed.items() if c > 0)
            if action.answer_node in graph.nodes and not graph.preconditions(action.answer_node) <= done:
                violations += 1
            executed[action.answer_node] += 1
    return violations
