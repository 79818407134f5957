"""LLM-driven user simulation and full-session rollout."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import Optional

from types import SimpleNamespace

from ..controllers import CONVERSATION_LENGTH, ControllerConfig, post_conversation_length
from ..actions import Action, SessionEnd, BotResponse, to_event_json
from ..runtime.backends import BackendError, GenParams, LlmBackend
from ..runtime.prompts import render_history, render_user_sim_prompt
from ..runtime.session import CLOSING_RESPONSE_TEXT, step
from ..state import SessionState, WorkflowBundle
from ..runtime.tools import ToolRegistry
from .oow import OowInjector, OowSpec
from .profiles import UserProfile
from .reference import ReferenceSession

logger = logging.getLogger(__name__)

END_SENTINEL = "[END]"
_RESPONSE_RE = re.compile(r"Response:\s*(.*)", re.DOTALL)


def simulate_user(profile: UserProfile, history, backend: LlmBackend, assistant_description: str = "") -> Optional[str]:
    """One simulated user utterance, or None when the user ends the session.

    The backend output must follow the "Response: xxx" format; a parse
    failure is retried once and then treated as the end of the session.
    """
    prompt = render_user_sim_prompt(
        assistant_description=assistant_description,
        user_profile=profile.render(),
        history_text=render_history(history),
    )
    for attempt in range(2):
        try:
            raw = backend.complete(prompt, GenParams())
        except BackendError as exc:
            logger.warning("user-sim backend error (%s); ending session", exc)
            return None
        match = _RESPONSE_RE.search(raw.strip())
        if match:
            utterance = match.group(1).strip()
            if utterance.strip("\"' ") == END_SENTINEL or utterance.startswith(END_SENTINEL):
                return None
            return utterance
        if raw.strip() == END_SENTINEL:
            return None
        logger.debug("unparseable user-sim output on attempt %d: %r", attempt + 1, raw[:80])
    return None


@dataclass
class UserSimulator:
    """Profile-driven user with optional OOW interventions."""

    profile: UserProfile
    backend: LlmBackend
    injector: OowInjector = field(default_factory=OowInjector)
    assistant_description: str = ""

    def next_utterance(self, history, turn_index: int):
        """Return (utterance | None, oow_annotation | None) for this turn."""
        fired: Optional[OowSpec] = self.injector.check(turn_index)
        profile = self.profile.with_constraints(fired.instruction) if fired else self.profile
        utterance = simulate_user(profile, history, self.backend, self.assistant_description)
        annotation = fired.annotation() if fired and utterance is not None else None
        return utterance, annotation


@dataclass
class SessionResult:
    state: SessionState
    transcript: ReferenceSession
    events: list[dict]
    end_reason: str


def run_session(
    workflow: WorkflowBundle,
    agent_policy,
    user_sim: UserSimulator,
    registry: ToolRegistry,
    cfg: ControllerConfig,
    session_id: Optional[str] = None,
    hard_cap: int = 50,
    labeler=None,
) -> SessionResult:
    """Alternate simulated user turns and agent turns until the session ends.

    Ends when the user sends [END], when the conversation-length controller
    cuts the session off (a closing response is forced), or at the hard cap.
    With scripted backends and a fixed seed the transcript is deterministic.
    """
    state = SessionState(workflow=workflow)
    if session_id is not None:
        state.session_id = session_id
    events: list[dict] = []

    def log(action: Action) -> None:
        events.append(to_event_json(action, state.session_id))

    end_reason = "hard_cap"
    for turn_index in range(1, hard_cap + 1):
        # would accepting the next user turn exceed the length limit?
        probe = SimpleNamespace(user_turns=state.user_turns + 1)
        if CONVERSATION_LENGTH in cfg.enabled_post and not post_conversation_length(probe, cfg).allowed:
            closing = BotResponse(text=CLOSING_RESPONSE_TEXT)
            state.history.append(closing)
            log(closing)
            end_reason = "length_limit"
            break
        utterance, annotation = user_sim.next_utterance(state.history, turn_index)
        if utterance is None:
            end_reason = "user_end"
            break
        message = state.add_user_message(utterance, oow=annotation)
        log(message)
        try:
            step(state, agent_policy, registry, cfg, on_action=log, labeler=labeler)
        except BackendError as exc:
            logger.error("agent backend failed mid-session: %s", exc)
            end_reason = "backend_error"
            break
    end = SessionEnd(reason=end_reason)
    log(end)
    return SessionResult(
        state=state,
        transcript=ReferenceSession.from_history(state.history),
        events=events,
        end_reason=end_reason,
    )
