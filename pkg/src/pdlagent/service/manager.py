"""Workflow store and session management for the HTTP service.

Each session is a single logical actor: one turn may be in flight at a time,
enforced by a non-blocking lock (the API maps a held lock to 409). Every
action is appended to an ordered event list and mirrored to a JSONL log.
"""

from __future__ import annotations

import hashlib
import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional

from ..controllers import ControllerConfig
from ..actions import Action, SessionEnd, action_payload, action_type
from ..baselines import ReactPolicy, format_for_agent_kind, render_workflow
from ..pdl import has_errors, parse_pdl, render_for_prompt, validate
from ..runtime import PdlAgentPolicy, ScriptedBackend, backend_from_spec
from ..simeval import OowInjector, OowKind, OowSpec, UserProfile, UserSimulator
from ..state import SessionState, WorkflowBundle
from ..runtime.session import step
from ..runtime.tools import ToolRegistry


class ServiceError(Exception):
    def __init__(self, status_code: int, detail: str):
        super().__init__(detail)
        self.status_code = status_code
        self.detail = detail


@dataclass
class RegisteredWorkflow:
    workflow_id: str
    bundle: WorkflowBundle
    source: str
    tool_behaviors: Mapping[str, Any] = field(default_factory=dict)


class WorkflowStore:
    """Content-addressed workflow registry; source files are never mutated."""

    def __init__(self):
        self._by_id: dict[str, RegisteredWorkflow] = {}
        self._lock = threading.Lock()

    def register(self, source: str, tool_behaviors: Optional[Mapping[str, Any]] = None) -> RegisteredWorkflow:
        doc = parse_pdl(source)
        if isinstance(doc, list):
            raise ServiceError(422, "workflow failed to parse: " + "; ".join(str(d) for d in doc))
        diagnostics = validate(doc)
        if has_errors(diagnostics):
            raise ServiceError(422, "workflow failed validation: " + "; ".join(str(d) for d in diagnostics))
        canonical = render_for_prompt(doc)
        workflow_id = hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]
        with self._lock:
            if workflow_id not in self._by_id:
                self._by_id[workflow_id] = RegisteredWorkflow(
                    workflow_id=workflow_id,
                    bundle=WorkflowBundle.from_doc(doc),
                    source=source,
                    tool_behaviors=dict(tool_behaviors or {}),
                )
            elif tool_behaviors:
                self._by_id[workflow_id].tool_behaviors = dict(tool_behaviors)
        return self._by_id[workflow_id]

    def get(self, workflow_id: str) -> RegisteredWorkflow:
        workflow = self._by_id.get(workflow_id)
        if workflow is None:
            raise ServiceError(404, f"unknown workflow {workflow_id!r}")
        return workflow

    def all(self) -> list[RegisteredWorkflow]:
        return list(self._by_id.values())


@dataclass
class SessionEvent:
    seq: int
    ts: float
    action: Action

    def to_json(self, session_id: str) -> dict:
        return {
            "seq": self.seq,
            "ts": self.ts,
            "session_id": session_id,
            "type": action_type(self.action),
            "payload": action_payload(self.action),
        }


class ManagedSession:
    def __init__(
        self,
        session_id: str,
        workflow: RegisteredWorkflow,
        policy,
        registry: ToolRegistry,
        cfg: ControllerConfig,
        user_sim: Optional[UserSimulator] = None,
        log_path: Optional[Path] = None,
    ):
        self.session_id = session_id
        self.workflow = workflow
        self.state = SessionState(workflow=workflow.bundle, session_id=session_id)
        self.policy = policy
        self.registry = registry
        self.cfg = cfg
        self.user_sim = user_sim
        self.turn_lock = threading.Lock()
        self.events: list[SessionEvent] = []
        self.events_cv = threading.Condition()
        self.log_path = log_path
        self.armed_oow: Optional[OowSpec] = None
        self.sim_turns = 0

    def append_event(self, action: Action) -> SessionEvent:
        with self.events_cv:
            event = SessionEvent(seq=len(self.events), ts=time.time(), action=action)
            self.events.append(event)
            self.events_cv.notify_all()
        if self.log_path is not None:
            with self.log_path.open("a", encoding="utf-8") as handle:
                handle.write(json.dumps(event.to_json(self.session_id), ensure_ascii=False) + "\n")
        return event

    def events_since(self, since: int) -> list[SessionEvent]:
        with self.events_cv:
            return self.events[since:]


class SessionManager:
    def __init__(self, store: WorkflowStore, run_dir: Optional[Path] = None):
        self.store = store
        self.run_dir = run_dir
        self._sessions: dict[str, ManagedSession] = {}
        self._lock = threading.Lock()
        self._counter = 0

    def _next_session_id(self) -> str:
        with self._lock:
            self._counter += 1
            return f"s{self._counter:06d}"

    def create(
        self,
        workflow_id: str,
        agent: str = "flowagent",
        backend_spec: Any = None,
        controller_overrides: Optional[Mapping[str, Any]] = None,
        user_spec: Optional[Mapping[str, Any]] = None,
    ) -> ManagedSession:
        workflow = self.store.get(workflow_id)
        registry = ToolRegistry.from_document(workflow.bundle.doc, workflow.tool_behaviors).fork()
        backend = backend_from_spec(backend_spec) or ScriptedBackend(
            responses=[], default="Thought: idle\nResponse: (no backend configured)"
        )

        cfg = ControllerConfig()
        if controller_overrides:
            cfg = cfg.with_overrides(**dict(controller_overrides))
        if agent == "flowagent":
            policy = PdlAgentPolicy(doc=workflow.bundle.doc, registry=registry, backend=backend)
        elif agent.startswith("react-"):
            rendered = render_workflow(workflow.bundle.doc, format_for_agent_kind(agent))
            policy = ReactPolicy(doc=workflow.bundle.doc, rendered=rendered, registry=registry, backend=backend)
            # prompt-only baseline: controllers off unless explicitly overridden
            if not controller_overrides:
                cfg = cfg.with_overrides(enabled_pre=frozenset(), enabled_post=frozenset())
        else:
            raise ServiceError(422, f"unknown agent kind {agent!r}")

        user_sim = None
        if user_spec and user_spec.get("kind") == "simulated":
            profile = UserProfile.from_mapping(user_spec.get("profile", {"persona": "a test user"}))
            user_backend = backend_from_spec(user_spec.get("backend"))
            if user_backend is None:
                raise ServiceError(422, "simulated user requires a backend")
            user_sim = UserSimulator(
                profile=profile,
                backend=user_backend,
                injector=OowInjector(seed=int(user_spec.get("seed", 0))),
                assistant_description=workflow.bundle.doc.desc,
            )

        session_id = self._next_session_id()
        log_path = None
        if self.run_dir is not None:
            self.run_dir.mkdir(parents=True, exist_ok=True)
            log_path = self.run_dir / f"{session_id}.events.jsonl"
        session = ManagedSession(
            session_id=session_id,
            workflow=workflow,
            policy=policy,
            registry=registry,
            cfg=cfg,
            user_sim=user_sim,
            log_path=log_path,
        )
        with self._lock:
            self._sessions[session_id] = session
        return session

    def get(self, session_id: str) -> ManagedSession:
        session = self._sessions.get(session_id)
        if session is None:
            raise ServiceError(404, f"unknown session {session_id!r}")
        return session

    def arm_oow(self, session_id: str, kind: str, instruction_text: Optional[str], subtype: Optional[str]) -> OowSpec:
        session = self.get(session_id)
        if session.user_sim is None:
            raise ServiceError(422, "OOW arming applies only to sessions with a simulated user")
        try:
            oow_kind = OowKind(kind)
        except ValueError:
            raise ServiceError(422, f"unknown OOW kind {kind!r}; expected one of "
                                    f"{[k.value for k in OowKind]}")
        spec = OowSpec(
            kind=oow_kind,
            schedule=(session.sim_turns + 1,),
            instruction_text=instruction_text,
            subtype=subtype,
        )
        session.armed_oow = spec
        return spec

    def post_message(self, session_id: str, text: Optional[str]):
        """Run one turn. `text` None advances a simulated-user session."""
        session = self.get(session_id)
        if not session.turn_lock.acquire(blocking=False):
            raise ServiceError(409, "a turn is already in flight for this session")
        try:
            if text is None:
                if session.user_sim is None:
                    raise ServiceError(422, "this session has no simulated user; provide message text")
                session.sim_turns += 1
                if session.armed_oow is not None:
                    session.user_sim.injector.specs = [session.armed_oow]
                    session.armed_oow = None
                else:
                    session.user_sim.injector.specs = []
                utterance, annotation = session.user_sim.next_utterance(
                    session.state.history, session.sim_turns
                )
                if utterance is None:
                    end = session.append_event(SessionEnd(reason="user_end"))
                    return None, end
                message = session.state.add_user_message(utterance, oow=annotation)
            else:
                message = session.state.add_user_message(text)
            session.append_event(message)
            response, _ = step(
                session.state,
                session.policy,
                session.registry,
                session.cfg,
                on_action=session.append_event,
            )
            return response, None
        finally:
            session.turn_lock.release()
