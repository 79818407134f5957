"""Pydantic request/response models for the HTTP API."""

from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel, Field


class DiagnosticModel(BaseModel):
    severity: str
    code: str
    message: str
    line: int
    col: int


class ValidateRequest(BaseModel):
    pdl: str


class ValidateResponse(BaseModel):
    diagnostics: list[DiagnosticModel]
    error_count: int
    warning_count: int


class RegisterWorkflowRequest(BaseModel):
    pdl: str
    tools: dict[str, Any] = Field(default_factory=dict)


class NodeModel(BaseModel):
    name: str
    kind: str
    desc: Optional[str] = None
    request_slots: list[str] = Field(default_factory=list)
    response_slots: list[str] = Field(default_factory=list)
    preconditions: list[str] = Field(default_factory=list)


class EdgeModel(BaseModel):
    source: str  # the precondition
    target: str  # the dependent node


class WorkflowSummary(BaseModel):
    workflow_id: str
    name: str
    desc: str
    nodes: list[NodeModel]
    edges: list[EdgeModel]


class UserSpecModel(BaseModel):
    kind: str = "human"  # human | simulated
    profile: dict[str, Any] = Field(default_factory=dict)
    backend: Optional[dict[str, Any]] = None
    seed: int = 0


class CreateSessionRequest(BaseModel):
    workflow_id: str
    agent: str = "flowagent"
    backend: Optional[dict[str, Any]] = None
    controllers: dict[str, Any] = Field(default_factory=dict)
    user: Optional[UserSpecModel] = None


class CreateSessionResponse(BaseModel):
    session_id: str


class MessageRequest(BaseModel):
    # omit text (null) to advance a simulated-user session by one turn
    text: Optional[str] = None


class BotResponseModel(BaseModel):
    text: str
    answer_node: Optional[str] = None


class StateResponse(BaseModel):
    session_id: str
    executed: dict[str, int]
    accessible: list[str]
    blocked: dict[str, list[str]]
    user_turns: int
    clock: int
    in_flight: bool


class MessageResponse(BaseModel):
    response: Optional[BotResponseModel]
    ended: bool = False
    state: StateResponse


class EventModel(BaseModel):
    seq: int
    ts: float
    session_id: str
    type: str
    payload: dict[str, Any]


class EventsResponse(BaseModel):
    events: list[EventModel]
    next: int


class ArmOowRequest(BaseModel):
    kind: str
    instruction_text: Optional[str] = None
    subtype: Optional[str] = None


class ArmOowResponse(BaseModel):
    armed: str
    subtype: Optional[str] = None
