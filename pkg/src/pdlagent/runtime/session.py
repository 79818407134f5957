"""The per-turn decision loop.

Each user turn runs: pre-decision guidance -> prompt -> policy -> parse ->
post-decision verdict. Denied or unparseable proposals are fed back to the
policy through a per-turn scratchpad and retried up to a configured budget;
allowed tool calls execute and the loop continues until the policy produces
a user-facing response.
"""

from __future__ import annotations

import logging
from typing import Callable, Optional

from ..controllers import (
    CONVERSATION_LENGTH,
    ControllerConfig,
    post_conversation_length,
    run_post,
    run_pre,
)
from ..actions import (
    Action,
    BotResponse,
    ControllerFeedback,
    ToolCall,
    ToolResult,
    UserMessage,
    is_error_payload,
)
from .backends import BackendError
from .output import ParseFailure, label_answer_node, parse_llm_output
from .policies import Policy
from ..state import SessionState
from .tools import ToolRegistry, UnknownToolError, execute_tool

logger = logging.getLogger(__name__)

FALLBACK_RESPONSE_TEXT = (
    "I'm sorry, I'm unable to comply with that request right now. Could we try a different step?"
)
CLOSING_RESPONSE_TEXT = (
    "We have reached the length limit for this conversation, so I need to wrap up here. "
    "Thank you, and feel free to start a new session if anything is left open."
)

OnAction = Optional[Callable[[Action], None]]


def step(
    state: SessionState,
    policy: Policy,
    registry: ToolRegistry,
    cfg: ControllerConfig,
    on_action: OnAction = None,
    labeler=None,
) -> tuple[BotResponse, list[Action]]:
    """Run one user turn to completion and return the final bot response.

    Every emitted action is appended to the event list in order; history
    receives only the user-visible ones (tool calls/results and the final
    response). Controller feedback stays in the event stream.
    """
    if not isinstance(state.last_action(), UserMessage):
        raise ValueError("step() requires the last history action to be a UserMessage")

    emitted: list[Action] = []

    def emit(action: Action, to_history: bool) -> None:
        if to_history:
            state.history.append(action)
        emitted.append(action)
        if on_action is not None:
            on_action(action)

    def finish(response: BotResponse) -> tuple[BotResponse, list[Action]]:
        if response.answer_node:
            state.executed[response.answer_node] += 1
        emit(response, to_history=True)
        return response, emitted

    # Length control acts at the turn boundary: once the cap is exceeded the
    # policy is not consulted and the turn closes immediately.
    if CONVERSATION_LENGTH in cfg.enabled_post:
        verdict = post_conversation_length(state, cfg)
        if not verdict.allowed:
            emit(ControllerFeedback(verdict.controller_id, verdict.feedback), to_history=False)
            return finish(BotResponse(text=CLOSING_RESPONSE_TEXT))

    graph = state.workflow.graph
    scratch: list[str] = []
    failures = 0
    tool_iterations = 0

    while True:
        guidance = run_pre(state, graph, cfg)
        try:
            raw = policy.propose(state, guidance, scratch)
        except BackendError as exc:
            failures += 1
            emit(ControllerFeedback("backend", f"backend error: {exc}"), to_history=False)
            scratch.append(f"[backend error] {exc}")
            if failures >= cfg.max_policy_retries_per_turn:
                return finish(BotResponse(text=FALLBACK_RESPONSE_TEXT))
            continue

        parsed = parse_llm_output(raw)
        if isinstance(parsed, ParseFailure):
            failures += 1
            emit(ControllerFeedback("output_format", parsed.reason), to_history=False)
            scratch.append(f"[format feedback] Your previous output could not be parsed: {parsed.reason}")
            if failures >= cfg.max_policy_retries_per_turn:
                return finish(BotResponse(text=FALLBACK_RESPONSE_TEXT))
            continue

        action = parsed
        if isinstance(action, BotResponse) and action.answer_node is None and labeler is not None:
            label = label_answer_node(action.text, state.workflow.doc, labeler)
            if label is not None:
                action = BotResponse(text=action.text, answer_node=label, thought=action.thought)

        verdict = run_post(state, graph, action, cfg)
        if not verdict.allowed:
            failures += 1
            emit(ControllerFeedback(verdict.controller_id, verdict.feedback), to_history=False)
            scratch.append(f"[controller feedback] {verdict.feedback}")
            if failures >= cfg.max_policy_retries_per_turn:
                return finish(BotResponse(text=FALLBACK_RESPONSE_TEXT))
            continue

        if isinstance(action, ToolCall):
            if tool_iterations >= cfg.max_tool_iterations_per_turn:
                emit(
                    ControllerFeedback(
                        "tool_budget",
                        f"tool-call budget of {cfg.max_tool_iterations_per_turn} per turn exhausted",
                    ),
                    to_history=False,
                )
                return finish(BotResponse(text=FALLBACK_RESPONSE_TEXT))
            try:
                result = execute_tool(registry, action)
            except UnknownToolError:
                result = ToolResult(
                    name=action.name,
                    payload={"error": "unknown_tool", "message": f"tool {action.name!r} is not registered"},
                )
            emit(action, to_history=True)
            emit(result, to_history=True)
            if not is_error_payload(result.payload):
                state.executed[action.name] += 1
            else:
                scratch.append(f"[tool error] {action.name}: {result.payload.get('message', 'failed')}")
            tool_iterations += 1
            continue

        return finish(action)


def predict_action(
    state: SessionState,
    policy: Policy,
    cfg: ControllerConfig,
    labeler=None,
) -> Action:
    """Predict the next action without executing anything.

    Used by turn-level evaluation: same retry/controller discipline as
    step(), but an allowed tool call is returned instead of executed.
    """
    graph = state.workflow.graph
    scratch: list[str] = []
    failures = 0
    while True:
        guidance = run_pre(state, graph, cfg)
        try:
            raw = policy.propose(state, guidance, scratch)
        except BackendError as exc:
            failures += 1
            scratch.append(f"[backend error] {exc}")
            if failures >= cfg.max_policy_retries_per_turn:
                return BotResponse(text=FALLBACK_RESPONSE_TEXT)
            continue
        parsed = parse_llm_output(raw)
        if isinstance(parsed, ParseFailure):
            failures += 1
            scratch.append(f"[format feedback] {parsed.reason}")
            if failures >= cfg.max_policy_retries_per_turn:
                return BotResponse(text=FALLBACK_RESPONSE_TEXT)
            continue
        action = parsed
        if isinstance(action, BotResponse) and action.answer_node is None and labeler is not None:
            label = label_answer_node(action.text, state.workflow.doc, labeler)
            if label is not None:
                action = BotResponse(text=action.text, answer_node=label, thought=action.thought)
        verdict = run_post(state, graph, action, cfg)
        if not verdict.allowed:
            failures += 1
            scratch.append(f"[controller feedback] {verdict.feedback}")
            if failures >= cfg.max_policy_retries_per_turn:
                return BotResponse(text=FALLBACK_RESPONSE_TEXT)
            continue
        return action
