"""Simulated tool execution backed by fixture-defined response tables."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional, Union

from ..pdl import PdlDocument
from ..actions import ToolCall, ToolResult, canonical_args


class UnknownToolError(KeyError):
    """A call named a tool that is not in the registry."""


@dataclass(frozen=True)
class ToolSchema:
    name: str
    desc: str = ""
    request_slots: tuple[str, ...] = ()
    response_slots: tuple[str, ...] = ()


@dataclass
class ToolBehavior:
    """Response lookup: exact argument match, then scripted sequence, then default."""

    by_args: dict[str, Mapping[str, Any]] = field(default_factory=dict)
    responses: list[Mapping[str, Any]] = field(default_factory=list)
    default: Optional[Mapping[str, Any]] = None
    cursor: int = 0

    def next_payload(self, call_args: Mapping[str, Any]) -> Optional[Mapping[str, Any]]:
        key = canonical_args(call_args)
        if key in self.by_args:
            return self.by_args[key]
        if self.cursor < len(self.responses):
            payload = self.responses[self.cursor]
            self.cursor += 1
            return payload
        return self.default

    def reset_copy(self) -> "ToolBehavior":
        return ToolBehavior(by_args=dict(self.by_args), responses=list(self.responses), default=self.default)


class ToolRegistry:
    """Tools available to one session.

    Sequential scripted responses make a registry stateful, so use one
    registry instance per session (see fork()).
    """

    def __init__(self, schemas: Mapping[str, ToolSchema], behaviors: Mapping[str, ToolBehavior]):
        self.schemas = dict(schemas)
        self.behaviors = {name: behaviors.get(name, ToolBehavior()) for name in self.schemas}

    @classmethod
    def from_document(
        cls,
        doc: PdlDocument,
        behaviors: Union[str, Path, Mapping[str, Any], None] = None,
    ) -> "ToolRegistry":
        """Build a registry covering every API node of the workflow.

        `behaviors` is a mapping (or path to a JSON file) of
        tool name -> {schema?, cases?, responses?, default?}.
        """
        if isinstance(behaviors, (str, Path)):
            behaviors = json.loads(Path(behaviors).read_text(encoding="utf-8"))
        behaviors = behaviors or {}

        schemas: dict[str, ToolSchema] = {}
        parsed: dict[str, ToolBehavior] = {}
        for node in doc.api_nodes:
            spec = behaviors.get(node.name, {})
            schema_spec = spec.get("schema", {})
            schemas[node.name] = ToolSchema(
                name=node.name,
                desc=schema_spec.get("desc", node.desc or ""),
                request_slots=tuple(schema_spec.get("request", node.request_slots)),
                response_slots=tuple(schema_spec.get("response", node.response_slots)),
            )
            by_args = {}
            for case in spec.get("cases", []):
                by_args[canonical_args(case["args"])] = case["payload"]
            parsed[node.name] = ToolBehavior(
                by_args=by_args,
                responses=list(spec.get("responses", [])),
                default=spec.get("default"),
            )
        return cls(schemas, parsed)

    def fork(self) -> "ToolRegistry":
        """Fresh registry with the same behaviors and reset script cursors."""
        return ToolRegistry(self.schemas, {name: b.reset_copy() for name, b in self.behaviors.items()})

    def descriptions(self) -> dict[str, str]:
        return {name: schema.desc for name, schema in self.schemas.items() if schema.desc}

    def __contains__(self, name: str) -> bool:
        return name in self.schemas

    def execute(self, call: ToolCall) -> ToolResult:
        return execute_tool(self, call)


def execute_tool(registry: ToolRegistry, call: ToolCall) -> ToolResult:
    """Run one tool call against the registry's response tables.

    Missing required request slots produce an error payload rather than an
    exception so the runtime can feed the problem back to the policy.
    """
    if call.name not in registry.schemas:
        raise UnknownToolError(call.name)
    schema = registry.schemas[call.name]
    missing = [slot for slot in schema.request_slots if slot not in call.args]
    if missing:
        return ToolResult(
            name=call.name,
            payload={
                "error": "missing_slots",
                "missing": missing,
                "message": f"required request slots absent: {', '.join(missing)}",
            },
        )
    payload = registry.behaviors[call.name].next_payload(call.args)
    if payload is None:
        return ToolResult(
            name=call.name,
            payload={"error": "no_response_configured", "message": f"no response configured for {call.name!r}"},
        )
    return ToolResult(name=call.name, payload=payload)
