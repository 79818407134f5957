"""Pre- and post-decision controllers.

Pre-decision controllers produce soft guidance that is rendered into the
prompt before the policy decides. Post-decision controllers are hard
constraints: they can veto a proposed action and return feedback naming the
violated rule. All controllers are pure functions of (state, graph, config,
action); composition is first-deny-wins in fixed registration order.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

from .pdl import DependencyGraph, accessible_nodes, topological_order
from .actions import Action, BotResponse, ToolCall, canonical_args
from .state import SessionState

DEPENDENCY = "dependency"
API_REPETITION = "api_repetition"
CONVERSATION_LENGTH = "conversation_length"

PRE_CONTROLLER_IDS = (DEPENDENCY,)
POST_CONTROLLER_IDS = (DEPENDENCY, API_REPETITION, CONVERSATION_LENGTH)


class Decision(str, Enum):
    ALLOW = "Allow"
    DENY = "Deny"


@dataclass(frozen=True)
class PreGuidance:
    controller_id: str
    guidance_text: str


@dataclass(frozen=True)
class ControllerVerdict:
    controller_id: str
    decision: Decision
    feedback: Optional[str] = None

    def __post_init__(self):
        if self.decision is Decision.DENY and not self.feedback:
            raise ValueError("a Deny verdict must carry feedback")

    @property
    def allowed(self) -> bool:
        return self.decision is Decision.ALLOW


def _allow(controller_id: str) -> ControllerVerdict:
    return ControllerVerdict(controller_id=controller_id, decision=Decision.ALLOW)


def _deny(controller_id: str, feedback: str) -> ControllerVerdict:
    return ControllerVerdict(controller_id=controller_id, decision=Decision.DENY, feedback=feedback)


@dataclass(frozen=True)
class ControllerConfig:
    max_identical_api_calls: int = 3
    max_total_turns: int = 20
    max_policy_retries_per_turn: int = 3
    max_tool_iterations_per_turn: int = 5
    enabled_pre: frozenset[str] = field(default_factory=lambda: frozenset(PRE_CONTROLLER_IDS))
    enabled_post: frozenset[str] = field(default_factory=lambda: frozenset(POST_CONTROLLER_IDS))

    def __post_init__(self):
        for name in (
            "max_identical_api_calls",
            "max_total_turns",
            "max_policy_retries_per_turn",
            "max_tool_iterations_per_turn",
        ):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")

    def with_overrides(self, **overrides) -> "ControllerConfig":
        cleaned = {k: v for k, v in overrides.items() if v is not None}
        for key in ("enabled_pre", "enabled_post"):
            if key in cleaned:
                cleaned[key] = frozenset(cleaned[key])
        return replace(self, **cleaned)

    @classmethod
    def ablation(cls, mode: str = "full", **kwargs) -> "ControllerConfig":
        """Convenience presets: 'full', 'no-post' and 'no-post-pre'."""
        if mode == "full":
            return cls(**kwargs)
        if mode == "no-post":
            return cls(enabled_post=frozenset(), **kwargs)
        if mode == "no-post-pre":
            return cls(enabled_pre=frozenset(), enabled_post=frozenset(), **kwargs)
        raise ValueError(f"unknown ablation mode {mode!r}")


# --------------------------------------------------------------------------
# Individual controllers


def pre_dependency(state: SessionState, graph: DependencyGraph) -> PreGuidance:
    """Describe which nodes are currently accessible and which are blocked."""
    accessible, blocked = accessible_nodes(graph, state.executed_set() & graph.nodes)
    order = topological_order(graph)
    accessible_line = ", ".join(n for n in order if n in accessible) or "none"
    blocked_parts = [
        f"{n} (needs: {', '.join(sorted(blocked[n]))})" for n in order if n in blocked
    ]
    blocked_line = "; ".join(blocked_parts) or "none"
    text = f"Accessible nodes: {accessible_line}\nBlocked nodes: {blocked_line}"
    return PreGuidance(controller_id=DEPENDENCY, guidance_text=text)


def _action_target_node(action: Action) -> Optional[str]:
    if isinstance(action, ToolCall):
        return action.name
    if isinstance(action, BotResponse) and action.answer_node:
        return action.answer_node
    return None


def post_dependency(state: SessionState, graph: DependencyGraph, action: Action) -> ControllerVerdict:
    """Veto transitions to nodes whose preconditions have not executed."""
    target = _action_target_node(action)
    if target is None:
        return _allow(DEPENDENCY)
    if target not in graph.nodes:
        return _deny(DEPENDENCY, f"unknown node {target!r}: it is not declared in the workflow")
    unmet = graph.preconditions(target) - state.executed_set()
    if unmet:
        return _deny(
            DEPENDENCY,
            f"node {target!r} is not accessible yet; unmet preconditions: "
            + ", ".join(sorted(unmet))
            + ". Complete those steps first.",
        )
    return _allow(DEPENDENCY)


def post_api_repetition(state: SessionState, action: Action, cfg: ControllerConfig) -> ControllerVerdict:
    """Cap how often the identical (tool, argument object) pair may run."""
    if not isinstance(action, ToolCall):
        return _allow(API_REPETITION)
    count = state.identical_call_count(action.name, canonical_args(action.args))
    if count >= cfg.max_identical_api_calls:
        return _deny(
            API_REPETITION,
            f"tool {action.name!r} was already executed {count} times with identical arguments "
            f"(limit {cfg.max_identical_api_calls}); do not repeat the call",
        )
    return _allow(API_REPETITION)


def post_conversation_length(state: SessionState, cfg: ControllerConfig) -> ControllerVerdict:
    """Terminate sessions whose user-turn count exceeds the configured cap."""
    if state.user_turns > cfg.max_total_turns:
        return _deny(
            CONVERSATION_LENGTH,
            f"the conversation exceeded the limit of {cfg.max_total_turns} user turns; "
            "wrap up with a closing response",
        )
    return _allow(CONVERSATION_LENGTH)


# --------------------------------------------------------------------------
# Composition


def run_pre(state: SessionState, graph: DependencyGraph, cfg: ControllerConfig) -> list[PreGuidance]:
    """Collect guidance from enabled pre-decision controllers, in registration order."""
    guidance: list[PreGuidance] = []
    if DEPENDENCY in cfg.enabled_pre:
        guidance.append(pre_dependency(state, graph))
    return guidance


def run_post(
    state: SessionState, graph: DependencyGraph, action: Action, cfg: ControllerConfig
) -> ControllerVerdict:
    """Evaluate enabled post-decision controllers; the first Deny wins."""
    if DEPENDENCY in cfg.enabled_post:
        verdict = post_dependency(state, graph, action)
        if not verdict.allowed:
            return verdict
    if API_REPETITION in cfg.enabled_post:
        verdict = post_api_repetition(state, action, cfg)
        if not verdict.allowed:
            return verdict
    if CONVERSATION_LENGTH in cfg.enabled_post:
        verdict = post_conversation_length(state, cfg)
        if not verdict.allowed:
            return verdict
    return _allow("post")
