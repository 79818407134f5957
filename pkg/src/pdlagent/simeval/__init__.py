"""User simulation, OOW interventions, judging, and metric computation."""

from .evaluate import (
    EchoReferencePolicy,
    evaluate_sessions,
    evaluate_turn,
    normalize_slot_value,
    slot_items,
)
from .judge import (
    SessionJudgement,
    TurnJudgement,
    completed_required_nodes,
    judge_session,
    judge_turn,
)
from .metrics import (
    SPLIT_ALL,
    SPLIT_IW,
    SPLIT_OOW,
    MetricsReport,
    Record,
    SessionRecord,
    TurnRecord,
    compute_metrics,
    compute_report,
    f1_score,
    render_markdown_table,
    report_to_json,
)
from .oow import DEFAULT_INSTRUCTIONS, OowInjector, OowKind, OowSpec, inject_oow, random_kind_spec
from .profiles import UserProfile, required_nodes_from_file
from .reference import ReferenceSession, RefTurn, ToolCallRef
from .simulate import (
    END_SENTINEL,
    SessionResult,
    UserSimulator,
    run_session,
    simulate_user,
)

__all__ = [
    "DEFAULT_INSTRUCTIONS", "END_SENTINEL", "EchoReferencePolicy", "MetricsReport", "OowInjector",
    "OowKind", "OowSpec", "Record", "RefTurn", "ReferenceSession", "SPLIT_ALL", "SPLIT_IW",
    "SPLIT_OOW", "SessionJudgement", "SessionRecord", "SessionResult", "ToolCallRef",
    "TurnJudgement", "TurnRecord", "UserProfile", "UserSimulator", "completed_required_nodes",
    "compute_metrics", "compute_report", "evaluate_sessions", "evaluate_turn", "f1_score",
    "inject_oow", "judge_session", "judge_turn", "normalize_slot_value", "random_kind_spec",
    "render_markdown_table", "report_to_json", "required_nodes_from_file", "run_session",
    "simulate_user", "slot_items",
]
