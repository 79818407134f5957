"""LLM judging of predicted turns and whole sessions.

Only the binary consistency verdict feeds the metrics; the 1-10 scores are
recorded for inspection but never aggregated.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import Optional

from ..actions import is_error_payload
from ..runtime.backends import BackendError, GenParams, LlmBackend
from ..runtime.prompts import render_judge_prompt
from .reference import ReferenceSession

logger = logging.getLogger(__name__)

_SCORE_RES = {
    "correctness": re.compile(r"Correctness Score:\s*([0-9]+(?:\.[0-9]+)?)"),
    "helpfulness": re.compile(r"Helpfulness Score:\s*([0-9]+(?:\.[0-9]+)?)"),
    "humanness": re.compile(r"Humanness Score:\s*([0-9]+(?:\.[0-9]+)?)"),
}
_CONSISTENCY_RE = re.compile(r"Consistency:\s*(Yes|No)", re.IGNORECASE)


@dataclass(frozen=True)
class TurnJudgement:
    consistent: bool
    scores: dict


def _parse_judgement(raw: str) -> Optional[TurnJudgement]:
    match = _CONSISTENCY_RE.search(raw)
    if not match:
        return None
    scores = {}
    for key, pattern in _SCORE_RES.items():
        found = pattern.search(raw)
        if found:
            scores[key] = float(found.group(1))
    return TurnJudgement(consistent=match.group(1).lower() == "yes", scores=scores)


def judge_turn(
    workflow_info: str,
    prefix_text: str,
    reference_response: str,
    predicted_response: str,
    judge_backend: LlmBackend,
) -> TurnJudgement:
    """Score one predicted response against the reference.

    Unparseable judge output is retried once, then treated as inconsistent.
    """
    prompt = render_judge_prompt(
        workflow_info=workflow_info,
        session=prefix_text,
        reference_input=reference_response,
        predicted_input=predicted_response,
    )
    for _ in range(2):
        try:
            raw = judge_backend.complete(prompt, GenParams())
        except BackendError as exc:
            logger.warning("judge backend error: %s", exc)
            continue
        judgement = _parse_judgement(raw)
        if judgement is not None:
            return judgement
        logger.debug("unparseable judge output: %r", raw[:120])
    return TurnJudgement(consistent=False, scores={})


@dataclass(frozen=True)
class SessionJudgement:
    success: bool
    task_progress: float
    completed_nodes: tuple[str, ...]


def _parse_system_payload(text: str) -> dict:
    import ast as _pyast
    import json as _json

    for loader in (_pyast.literal_eval, _json.loads):
        try:
            value = loader(text)
        except (ValueError, SyntaxError):
            continue
        if isinstance(value, dict):
            return value
    return {}


def completed_required_nodes(transcript: ReferenceSession, required_nodes) -> list[str]:
    """Required nodes with a successful tool result in the transcript."""
    completed = set()
    turns = transcript.turns
    for i, turn in enumerate(turns):
        if turn.role != "BOT" or turn.tool_call is None:
            continue
        if i + 1 < len(turns) and turns[i + 1].role == "SYSTEM":
            if is_error_payload(_parse_system_payload(turns[i + 1].text)):
                continue
            completed.add(turn.tool_call.name)
    return [n for n in required_nodes if n in completed]


def judge_session(
    workflow_info: str,
    transcript: ReferenceSession,
    required_nodes,
    judge_backend: Optional[LlmBackend] = None,
    objectives: str = "",
) -> SessionJudgement:
    """Binary success plus mechanically counted task progress.

    Task progress is computed from the transcript alone (completed required
    nodes / required nodes) and never depends on the judge. Success uses the
    judge's binary verdict when a backend is configured; without one it
    falls back to full mechanical completion.
    """
    required = list(required_nodes)
    completed = completed_required_nodes(transcript, required)
    if required:
        progress = len(completed) / len(required)
    else:
        logger.warning("judge_session called with empty required_nodes; task_progress defined as 1.0")
        progress = 1.0

    if judge_backend is None:
        success = progress == 1.0
    else:
        session_text = "\n".join(f"{t.role}: {t.text}" for t in transcript.turns)
        final_bot = next((t.text for t in reversed(transcript.turns) if t.role == "BOT"), "")
        reference = objectives or (
            "The user's primary workflow objectives require completing these steps: " + ", ".join(required)
        )
        judgement = judge_turn(workflow_info, session_text, reference, final_bot, judge_backend)
        success = judgement.consistent
    return SessionJudgement(success=success, task_progress=progress, completed_nodes=tuple(completed))
