"""FastAPI application exposing workflows, sessions, state, and event streams."""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse, StreamingResponse

from ..pdl import accessible_nodes, parse_pdl, validate
from .manager import ManagedSession, ServiceError, SessionManager, WorkflowStore
from .schemas import (
    ArmOowRequest,
    ArmOowResponse,
    BotResponseModel,
    CreateSessionRequest,
    CreateSessionResponse,
    DiagnosticModel,
    EdgeModel,
    EventModel,
    EventsResponse,
    MessageRequest,
    MessageResponse,
    NodeModel,
    RegisterWorkflowRequest,
    StateResponse,
    ValidateRequest,
    ValidateResponse,
    WorkflowSummary,
)


def _state_response(session: ManagedSession) -> StateResponse:
    graph = session.workflow.bundle.graph
    executed = {name: count for name, count in session.state.executed.items() if count > 0}
    accessible, blocked = accessible_nodes(graph, set(executed) & graph.nodes)
    return StateResponse(
        session_id=session.session_id,
        executed=executed,
        accessible=sorted(accessible),
        blocked={node: sorted(unmet) for node, unmet in sorted(blocked.items())},
        user_turns=session.state.user_turns,
        clock=session.state.clock,
        in_flight=session.turn_lock.locked(),
    )


def _workflow_summary(registered) -> WorkflowSummary:
    doc = registered.bundle.doc
    graph = registered.bundle.graph
    nodes = [
        NodeModel(
            name=n.name,
            kind=n.kind.value,
            desc=n.desc,
            request_slots=list(n.request_slots),
            response_slots=list(n.response_slots),
            preconditions=list(n.preconditions),
        )
        for n in doc.nodes()
    ]
    edges = [
        EdgeModel(source=pre, target=node)
        for node in sorted(graph.nodes)
        for pre in sorted(graph.preconditions(node))
    ]
    return WorkflowSummary(
        workflow_id=registered.workflow_id, name=doc.name, desc=doc.desc, nodes=nodes, edges=edges
    )


def create_app(
    workflow_paths: Optional[list[str]] = None,
    run_dir: Optional[str] = None,
    console_dir: Optional[str] = None,
) -> FastAPI:
    app = FastAPI(title="pdlagent service", version="0.1.0")
    store = WorkflowStore()
    manager = SessionManager(store, run_dir=Path(run_dir) if run_dir else None)
    app.state.store = store
    app.state.manager = manager

    for path in workflow_paths or []:
        source = Path(path).read_text(encoding="utf-8")
        tools_path = Path(path).with_suffix(".tools.json")
        behaviors = json.loads(tools_path.read_text(encoding="utf-8")) if tools_path.exists() else {}
        store.register(source, behaviors)

    @app.exception_handler(ServiceError)
    async def service_error_handler(request: Request, exc: ServiceError):
        return JSONResponse(status_code=exc.status_code, content={"detail": exc.detail})

    @app.post("/workflows/validate", response_model=ValidateResponse)
    def validate_workflow(body: ValidateRequest):
        parsed = parse_pdl(body.pdl)
        if isinstance(parsed, list):
            diagnostics = parsed
        else:
            diagnostics = validate(parsed)
        models = [DiagnosticModel(**d.to_json()) for d in diagnostics]
        return ValidateResponse(
            diagnostics=models,
            error_count=sum(1 for d in models if d.severity == "Error"),
            warning_count=sum(1 for d in models if d.severity == "Warning"),
        )

    @app.post("/workflows", response_model=WorkflowSummary)
    def register_workflow(body: RegisterWorkflowRequest):
        registered = store.register(body.pdl, body.tools)
        return _workflow_summary(registered)

    @app.get("/workflows", response_model=list[WorkflowSummary])
    def list_workflows():
        return [_workflow_summary(r) for r in store.all()]

    @app.post("/sessions", response_model=CreateSessionResponse)
    def create_session(body: CreateSessionRequest):
        session = manager.create(
            workflow_id=body.workflow_id,
            agent=body.agent,
            backend_spec=body.backend,
            controller_overrides=body.controllers or None,
            user_spec=body.user.model_dump() if body.user else None,
        )
        return CreateSessionResponse(session_id=session.session_id)

    @app.post("/sessions/{session_id}/messages", response_model=MessageResponse)
    def post_message(session_id: str, body: MessageRequest):
        response, end_event = manager.post_message(session_id, body.text)
        session = manager.get(session_id)
        return MessageResponse(
            response=BotResponseModel(text=response.text, answer_node=response.answer_node)
            if response is not None
            else None,
            ended=end_event is not None,
            state=_state_response(session),
        )

    @app.get("/sessions/{session_id}/state", response_model=StateResponse)
    def get_state(session_id: str):
        return _state_response(manager.get(session_id))

    @app.get("/sessions/{session_id}/events")
    def get_events(
        session_id: str,
        since: int = Query(default=0, ge=0),
        stream: bool = Query(default=False),
        idle_timeout: float = Query(default=0.0, ge=0.0),
    ):
        """Ordered events, as JSON (with `since` for replay) or as an SSE stream.

        A positive idle_timeout closes the stream after that many seconds
        without new events; clients reconnect with since=<next seq>.
        """
        session = manager.get(session_id)
        if not stream:
            events = [EventModel(**e.to_json(session_id)) for e in session.events_since(since)]
            return EventsResponse(events=events, next=since + len(events)).model_dump()

        def event_stream():
            cursor = since
            wait_s = min(idle_timeout, 10.0) if idle_timeout > 0 else 10.0
            while True:
                with session.events_cv:
                    session.events_cv.wait_for(lambda: len(session.events) > cursor, timeout=wait_s)
                    fresh = session.events[cursor:]
                if not fresh:
                    if idle_timeout > 0:
                        return
                    yield ": keepalive\n\n"
                    continue
                for event in fresh:
                    cursor += 1
                    yield f"data: {json.dumps(event.to_json(session_id), ensure_ascii=False)}\n\n"

        return StreamingResponse(event_stream(), media_type="text/event-stream")

    @app.post("/sessions/{session_id}/oow", response_model=ArmOowResponse)
    def arm_oow(session_id: str, body: ArmOowRequest):
        spec = manager.arm_oow(session_id, body.kind, body.instruction_text, body.subtype)
        return ArmOowResponse(armed=spec.kind.value, subtype=spec.subtype)

    if console_dir and Path(console_dir).exists():
        from fastapi.staticfiles import StaticFiles

        app.mount("/console", StaticFiles(directory=console_dir, html=True), name="console")

    return app


def default_app() -> FastAPI:
    """App factory for `uvicorn pdlagent.service.app:default_app`."""
    paths = [p for p in os.environ.get("PDLAGENT_WORKFLOWS", "").split(os.pathsep) if p]
    return create_app(
        workflow_paths=paths,
        run_dir=os.environ.get("PDLAGENT_RUN_DIR"),
        console_dir=os.environ.get("PDLAGENT_CONSOLE_DIR"),
    )
