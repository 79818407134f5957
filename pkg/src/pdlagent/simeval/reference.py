"""Reference sessions and transcripts in JSONL form."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional, Union

from ..actions import (
    Action,
    BotResponse,
    ToolCall,
    ToolResult,
    UserMessage,
    format_args,
    CALL_PREFIX,
)


@dataclass(frozen=True)
class ToolCallRef:
    name: str
    args: Mapping[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class RefTurn:
    role: str  # USER | BOT | SYSTEM
    text: str
    tool_call: Optional[ToolCallRef] = None
    oow_annotation: Optional[tuple[str, Optional[str]]] = None

    def to_json(self) -> dict:
        record: dict = {"role": self.role, "text": self.text}
        if self.tool_call is not None:
            record["tool_call"] = {"name": self.tool_call.name, "args": dict(self.tool_call.args)}
        if self.oow_annotation is not None:
            kind, subtype = self.oow_annotation
            record["oow_annotation"] = [kind, subtype] if subtype else [kind]
        return record

    @classmethod
    def from_json(cls, record: Mapping[str, Any]) -> "RefTurn":
        tool_call = None
        if record.get("tool_call"):
            tool_call = ToolCallRef(name=record["tool_call"]["name"], args=dict(record["tool_call"].get("args", {})))
        annotation = None
        if record.get("oow_annotation"):
            parts = list(record["oow_annotation"])
            annotation = (parts[0], parts[1] if len(parts) > 1 else None)
        return cls(role=record["role"], text=record["text"], tool_call=tool_call, oow_annotation=annotation)


@dataclass(frozen=True)
class ReferenceSession:
    turns: tuple[RefTurn, ...]

    def bot_turns(self) -> list[tuple[int, RefTurn]]:
        return [(i, t) for i, t in enumerate(self.turns) if t.role == "BOT"]

    def user_turn_count(self) -> int:
        return sum(1 for t in self.turns if t.role == "USER")

    def to_jsonl(self) -> str:
        return "\n".join(json.dumps(t.to_json(), ensure_ascii=False) for t in self.turns) + "\n"

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.to_jsonl(), encoding="utf-8")

    @classmethod
    def from_jsonl(cls, text: str) -> "ReferenceSession":
        turns = [RefTurn.from_json(json.loads(line)) for line in text.splitlines() if line.strip()]
        return cls(turns=tuple(turns))

    @classmethod
    def load(cls, path: Union[str, Path]) -> "ReferenceSession":
        return cls.from_jsonl(Path(path).read_text(encoding="utf-8"))

    @classmethod
    def from_history(cls, history: Iterable[Action]) -> "ReferenceSession":
        """Project a session's action history onto the transcript schema."""
        turns: list[RefTurn] = []
        for action in history:
            if isinstance(action, UserMessage):
                turns.append(RefTurn(role="USER", text=action.text, oow_annotation=action.oow))
            elif isinstance(action, ToolCall):
                turns.append(
                    RefTurn(
                        role="BOT",
                        text=f"{CALL_PREFIX}{action.name}({format_args(action.args)})",
                        tool_call=ToolCallRef(name=action.name, args=dict(action.args)),
                    )
                )
            elif isinstance(action, ToolResult):
                turns.append(RefTurn(role="SYSTEM", text=format_args(action.payload)))
            elif isinstance(action, BotResponse):
                turns.append(RefTurn(role="BOT", text=action.text))
        return cls(turns=tuple(turns))

    def prefix_actions(self, upto: int) -> list[Action]:
        """Convert turns[0:upto] into history actions for prefix replay."""
        actions: list[Action] = []
        for turn in self.turns[:upto]:
            if turn.role == "USER":
                actions.append(UserMessage(text=turn.text, oow=turn.oow_annotation))
            elif turn.role == "BOT" and turn.tool_call is not None:
                actions.append(ToolCall(name=turn.tool_call.name, args=dict(turn.tool_call.args)))
            elif turn.role == "BOT":
                actions.append(BotResponse(text=turn.text))
            else:  # SYSTEM
                name = ""
                for previous in reversed(actions):
                    if isinstance(previous, ToolCall):
                        name = previous.name
                        break
                import ast as _pyast

                try:
                    payload = _pyast.literal_eval(turn.text)
                except (ValueError, SyntaxError):
                    payload = {"raw": turn.text}
                actions.append(ToolResult(name=name, payload=payload))
        return actions
