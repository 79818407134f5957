"""Metric aggregation over per-turn and per-session records."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Union

SPLIT_ALL = "ALL"
SPLIT_IW = "IW"
SPLIT_OOW = "OOW"


@dataclass(frozen=True)
class TurnRecord:
    """Outcome of predicting one reference turn.

    For tool turns the slot-level match counts feed micro-averaged
    precision/recall; `consistent` is exact-match for tool turns and the
    judge's binary verdict for response turns.
    """

    turn_index: int
    kind: str  # "tool" | "response"
    consistent: bool
    oow: bool = False
    predicted_items: int = 0
    reference_items: int = 0
    matched_items: int = 0
    scores: dict = field(default_factory=dict)
    session_id: str = ""


@dataclass(frozen=True)
class SessionRecord:
    session_id: str
    success: bool
    task_progress: float
    oow: bool = False
    required_count: int = 0
    completed_count: int = 0


Record = Union[TurnRecord, SessionRecord]


@dataclass(frozen=True)
class MetricsReport:
    split: str
    pass_rate: float
    success_rate: float
    task_progress: float
    tool_precision: float
    tool_recall: float
    tool_f1: float
    counts: dict

    def to_json(self) -> dict:
        return {
            "split": self.split,
            "pass_rate": self.pass_rate,
            "success_rate": self.success_rate,
            "task_progress": self.task_progress,
            "tool_precision": self.tool_precision,
            "tool_recall": self.tool_recall,
            "tool_f1": self.tool_f1,
            "counts": dict(self.counts),
        }


def f1_score(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def _in_split(record: Record, split: str) -> bool:
    if split == SPLIT_ALL:
        return True
    return record.oow == (split == SPLIT_OOW)


def compute_metrics(records: Iterable[Record], split: str = SPLIT_ALL) -> MetricsReport:
    """Aggregate records into one report for the requested split.

    pass_rate averages per-turn consistency; success_rate and task_progress
    average per-session records; tool precision/recall/F1 are micro-averaged
    over slot matches across all tool turns.
    """
    turn_records = []
    session_records = []
    for record in records:
        if not _in_split(record, split):
            continue
        if isinstance(record, TurnRecord):
            turn_records.append(record)
        else:
            session_records.append(record)

    pass_rate = (
        sum(1 for r in turn_records if r.consistent) / len(turn_records) if turn_records else 0.0
    )
    success_rate = (
        sum(1 for r in session_records if r.success) / len(session_records) if session_records else 0.0
    )
    task_progress = (
        sum(r.task_progress for r in session_records) / len(session_records) if session_records else 0.0
    )

    predicted = sum(r.predicted_items for r in turn_records)
    reference = sum(r.reference_items for r in turn_records)
    matched = sum(r.matched_items for r in turn_records)
    precision = matched / predicted if predicted else 0.0
    recall = matched / reference if reference else 0.0

    oow_turns = sum(1 for r in turn_records if r.oow)
    return MetricsReport(
        split=split,
        pass_rate=pass_rate,
        success_rate=success_rate,
        task_progress=task_progress,
        tool_precision=precision,
        tool_recall=recall,
        tool_f1=f1_score(precision, recall),
        counts={
            "sessions": len(session_records),
            "turns": len(turn_records),
            "oow_turns": oow_turns,
        },
    )


def compute_report(records: Iterable[Record]) -> dict[str, MetricsReport]:
    """Reports for the overall set and the IW/OOW splits."""
    records = list(records)
    return {
        SPLIT_ALL: compute_metrics(records, SPLIT_ALL),
        SPLIT_IW: compute_metrics(records, SPLIT_IW),
        SPLIT_OOW: compute_metrics(records, SPLIT_OOW),
    }


_COLUMNS = ("pass_rate", "success_rate", "task_progress", "tool_precision", "tool_recall", "tool_f1")


def render_markdown_table(reports_by_agent: dict[str, dict[str, MetricsReport]]) -> str:
    """Comparison table: one row per agent, metric columns per split."""
    splits = (SPLIT_ALL, SPLIT_IW, SPLIT_OOW)
    header = ["agent"]
    for split in splits:
        header.extend(f"{metric} ({split})" for metric in _COLUMNS)
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    for agent, reports in sorted(reports_by_agent.items()):
        row = [agent]
        for split in splits:
            report = reports.get(split)
            if report is None:
                row.extend("-" for _ in _COLUMNS)
            else:
                row.extend(f"{getattr(report, metric):.3f}" for metric in _COLUMNS)
        lines.append("| " + " | ".join(row) + " |")
    return "\n".join(lines) + "\n"


def report_to_json(reports: dict[str, MetricsReport]) -> str:
    return json.dumps({split: report.to_json() for split, report in reports.items()}, indent=2, sort_keys=True)
