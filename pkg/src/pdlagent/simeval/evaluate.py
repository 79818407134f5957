"""Turn-level and session-level evaluation against reference sessions."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from typing import Iterable, Optional

from ..controllers import CONVERSATION_LENGTH, ControllerConfig
from ..pdl import render_for_prompt
from ..actions import BotResponse, ToolCall, render_transcript_line
from ..runtime.backends import LlmBackend
from ..runtime.session import predict_action
from ..state import SessionState, WorkflowBundle, replay_executed
from .judge import judge_session, judge_turn
from .metrics import SessionRecord, TurnRecord
from .reference import ReferenceSession, RefTurn

logger = logging.getLogger(__name__)


def normalize_slot_value(value) -> tuple:
    """Comparison key for slot values: trimmed string, numeric when both sides parse."""
    text = str(value).strip()
    try:
        return ("num", float(text))
    except ValueError:
        return ("str", text)


def slot_items(name: str, args) -> set[tuple]:
    return {(name, key, normalize_slot_value(value)) for key, value in dict(args).items()}


@dataclass
class EchoReferencePolicy:
    """Replays the reference session's own bot turns; a sanity baseline.

    Feeding it through the evaluation pipeline must yield perfect scores,
    which pins the metric plumbing down.
    """

    reference: ReferenceSession
    agent_kind: str = "echo"

    def __post_init__(self):
        self._outputs = [self._render(turn) for _, turn in self.reference.bot_turns()]
        self._cursor = 0

    @staticmethod
    def _render(turn: RefTurn) -> str:
        if turn.tool_call is not None:
            return (
                "Thought: replaying the reference decision\n"
                f"Action: {turn.tool_call.name}\n"
                f"Action Input: {json.dumps(dict(turn.tool_call.args), ensure_ascii=False)}"
            )
        return f"Thought: replaying the reference decision\nResponse: {turn.text}"

    def propose(self, state, guidance, scratch) -> str:
        output = self._outputs[self._cursor % len(self._outputs)]
        self._cursor += 1
        return output


def evaluate_turn(
    workflow: WorkflowBundle,
    reference: ReferenceSession,
    agent_policy,
    judge_backend: Optional[LlmBackend] = None,
    cfg: Optional[ControllerConfig] = None,
    session_id: str = "",
    labeler=None,
) -> list[TurnRecord]:
    """Predict every reference bot turn from its exact prefix and score it.

    The policy always sees the reference prefix, never its own outputs.
    Tool turns are scored by a mechanical exact-match oracle over slot
    items; response turns go to the judge (or to exact text comparison when
    no judge backend is configured).
    """
    cfg = cfg or ControllerConfig()
    # length control bounds live sessions; it must not veto prefix replays
    cfg = cfg.with_overrides(enabled_post=cfg.enabled_post - {CONVERSATION_LENGTH})
    workflow_info = render_for_prompt(workflow.doc)
    records: list[TurnRecord] = []

    for index, turn in reference.bot_turns():
        prefix = reference.prefix_actions(index)
        state = SessionState(workflow=workflow)
        state.history = list(prefix)
        state.executed = replay_executed(prefix)
        state.user_turns = sum(1 for t in reference.turns[:index] if t.role == "USER")
        state.clock = state.user_turns

        predicted = predict_action(state, agent_policy, cfg, labeler=labeler)
        oow = _prefix_tail_is_oow(reference, index)

        if turn.tool_call is not None:
            reference_items = slot_items(turn.tool_call.name, turn.tool_call.args)
            if isinstance(predicted, ToolCall):
                predicted_items = slot_items(predicted.name, predicted.args)
            else:
                predicted_items = set()  # empty-prediction convention
            matched = reference_items & predicted_items
            consistent = (
                isinstance(predicted, ToolCall)
                and predicted.name == turn.tool_call.name
                and predicted_items == reference_items
            )
            records.append(
                TurnRecord(
                    turn_index=index,
                    kind="tool",
                    consistent=consistent,
                    oow=oow,
                    predicted_items=len(predicted_items),
                    reference_items=len(reference_items),
                    matched_items=len(matched),
                    session_id=session_id,
                )
            )
        else:
            predicted_text = (
                predicted.text if isinstance(predicted, BotResponse) else render_transcript_line(predicted)
            )
            if judge_backend is None:
                consistent = predicted_text.strip() == turn.text.strip()
                scores: dict = {}
            else:
                prefix_text = "\n".join(f"{t.role}: {t.text}" for t in reference.turns[:index])
                judgement = judge_turn(workflow_info, prefix_text, turn.text, predicted_text, judge_backend)
                consistent = judgement.consistent
                scores = judgement.scores
            records.append(
                TurnRecord(
                    turn_index=index,
                    kind="response",
                    consistent=consistent,
                    oow=oow,
                    scores=scores,
                    session_id=session_id,
                )
            )
    return records


def _prefix_tail_is_oow(reference: ReferenceSession, index: int) -> bool:
    """A bot turn answers the most recent user turn; it inherits that turn's OOW flag."""
    for turn in reversed(reference.turns[:index]):
        if turn.role == "USER":
            return turn.oow_annotation is not None
    return False


def evaluate_sessions(
    transcripts: Iterable[tuple[str, ReferenceSession]],
    workflow_info: str,
    required_nodes,
    judge_backend: Optional[LlmBackend] = None,
    objectives: str = "",
) -> list[SessionRecord]:
    """Session records (success, task progress, OOW flag) for each transcript."""
    records = []
    required = list(required_nodes)
    for session_id, transcript in transcripts:
        judgement = judge_session(workflow_info, transcript, required, judge_backend, objectives)
        oow = any(t.oow_annotation is not None for t in transcript.turns)
        records.append(
            SessionRecord(
                session_id=session_id,
                success=judgement.success,
                task_progress=judgement.task_progress,
                oow=oow,
                required_count=len(required),
                completed_count=len(judgement.completed_nodes),
            )
        )
    return records
