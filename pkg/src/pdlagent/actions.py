"""Action types exchanged during a session, plus transcript-line codecs.

Transcript lines follow the conventional format:

    USER: <text>
    BOT: <text>
    BOT: <Call API> tool_name({'slot': 'value', ...})
    SYSTEM: {'slot': 'value', ...}
"""

from __future__ import annotations

import ast as _pyast
import json
import time
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional, Union


@dataclass(frozen=True)
class UserMessage:
    text: str
    # (kind, subtype) when this turn was an out-of-workflow intervention
    oow: Optional[tuple[str, Optional[str]]] = None


@dataclass(frozen=True)
class BotResponse:
    text: str
    answer_node: Optional[str] = None
    thought: Optional[str] = None


@dataclass(frozen=True)
class ToolCall:
    name: str
    args: Mapping[str, Any] = field(default_factory=dict)
    thought: Optional[str] = None


@dataclass(frozen=True)
class ToolResult:
    name: str
    payload: Mapping[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class ControllerFeedback:
    controller_id: str
    text: str


@dataclass(frozen=True)
class SessionEnd:
    reason: str


Action = Union[UserMessage, BotResponse, ToolCall, ToolResult, ControllerFeedback, SessionEnd]

_TYPE_NAMES = {
    UserMessage: "user_message",
    BotResponse: "bot_response",
    ToolCall: "tool_call",
    ToolResult: "tool_result",
    ControllerFeedback: "controller_feedback",
    SessionEnd: "session_end",
}


def action_type(action: Action) -> str:
    return _TYPE_NAMES[type(action)]


def action_payload(action: Action) -> dict:
    if isinstance(action, UserMessage):
        payload: dict = {"text": action.text}
        if action.oow is not None:
            kind, subtype = action.oow
            payload["oow"] = [kind] if subtype is None else [kind, subtype]
        return payload
    if isinstance(action, BotResponse):
        payload = {"text": action.text}
        if action.answer_node is not None:
            payload["answer_node"] = action.answer_node
        if action.thought is not None:
            payload["thought"] = action.thought
        return payload
    if isinstance(action, ToolCall):
        payload = {"name": action.name, "args": dict(action.args)}
        if action.thought is not None:
            payload["thought"] = action.thought
        return payload
    if isinstance(action, ToolResult):
        return {"name": action.name, "payload": dict(action.payload)}
    if isinstance(action, ControllerFeedback):
        return {"controller_id": action.controller_id, "text": action.text}
    return {"reason": action.reason}


def action_from_payload(type_name: str, payload: Mapping[str, Any]) -> Action:
    if type_name == "user_message":
        oow = payload.get("oow")
        if oow:
            oow = (oow[0], oow[1] if len(oow) > 1 else None)
        return UserMessage(text=payload["text"], oow=oow or None)
    if type_name == "bot_response":
        return BotResponse(
            text=payload["text"],
            answer_node=payload.get("answer_node"),
            thought=payload.get("thought"),
        )
    if type_name == "tool_call":
        return ToolCall(name=payload["name"], args=dict(payload.get("args", {})), thought=payload.get("thought"))
    if type_name == "tool_result":
        return ToolResult(name=payload["name"], payload=dict(payload.get("payload", {})))
    if type_name == "controller_feedback":
        return ControllerFeedback(controller_id=payload["controller_id"], text=payload["text"])
    if type_name == "session_end":
        return SessionEnd(reason=payload["reason"])
    raise ValueError(f"unknown action type {type_name!r}")


def to_event_json(action: Action, session_id: str, ts: Optional[float] = None) -> dict:
    return {
        "ts": time.time() if ts is None else ts,
        "session_id": session_id,
        "type": action_type(action),
        "payload": action_payload(action),
    }


def event_from_json(event: Mapping[str, Any]) -> Action:
    return action_from_payload(event["type"], event["payload"])


# --------------------------------------------------------------------------
# Argument canonicalization and formatting


def canonical_args(args: Mapping[str, Any]) -> str:
    """Key-sorted, whitespace-free serialization used to detect repeats."""
    return json.dumps(dict(args), sort_keys=True, separators=(",", ":"), ensure_ascii=False, default=str)


def format_args(args: Mapping[str, Any]) -> str:
    """Render an argument object in dict-literal style, preserving key order."""
    return "{" + ", ".join(f"{k!r}: {v!r}" for k, v in dict(args).items()) + "}"


def is_error_payload(payload: Mapping[str, Any]) -> bool:
    return "error" in payload


# --------------------------------------------------------------------------
# Transcript lines

CALL_PREFIX = "<Call API> "


def render_transcript_line(action: Action) -> str:
    if isinstance(action, UserMessage):
        return f"USER: {action.text}"
    if isinstance(action, BotResponse):
        return f"BOT: {action.text}"
    if isinstance(action, ToolCall):
        return f"BOT: {CALL_PREFIX}{action.name}({format_args(action.args)})"
    if isinstance(action, ToolResult):
        return f"SYSTEM: {format_args(action.payload)}"
    if isinstance(action, ControllerFeedback):
        return f"CONTROLLER[{action.controller_id}]: {action.text}"
    return f"SESSION_END: {action.reason}"


def parse_transcript_line(line: str) -> Action:
    if line.startswith("USER: "):
        return UserMessage(text=line[len("USER: "):])
    if line.startswith("BOT: " + CALL_PREFIX):
        body = line[len("BOT: " + CALL_PREFIX):]
        open_paren = body.index("(")
        name = body[:open_paren]
        args_src = body[open_paren + 1: body.rindex(")")]
        args = _pyast.literal_eval(args_src) if args_src.strip() else {}
        return ToolCall(name=name, args=args)
    if line.startswith("BOT: "):
        return BotResponse(text=line[len("BOT: "):])
    if line.startswith("SYSTEM: "):
        payload = _pyast.literal_eval(line[len("SYSTEM: "):])
        return ToolResult(name="", payload=payload)
    raise ValueError(f"unrecognized transcript line: {line[:60]!r}")
