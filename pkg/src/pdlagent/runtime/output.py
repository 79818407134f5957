"""Parsing of policy output into actions, and answer-node labeling."""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from typing import Optional, Union

from ..pdl import PdlDocument
from ..actions import Action, BotResponse, ToolCall
from .backends import LlmBackend

logger = logging.getLogger(__name__)

_ANSWER_LINE_RE = re.compile(r"^\s*Answer:\s*([A-Za-z_][A-Za-z0-9_]*)\s*$", re.MULTILINE)
_WORD_RE = re.compile(r"[a-z0-9']+")


@dataclass(frozen=True)
class ParseFailure:
    reason: str


def _strip_code_fences(text: str) -> str:
    lines = text.strip().split("\n")
    kept = [line for line in lines if not line.strip().startswith("```")]
    return "\n".join(kept).strip()


def _extract_json_object(text: str) -> Optional[str]:
    """Best-effort extraction of the first balanced {...} object."""
    start = text.find("{")
    if start < 0:
        return None
    depth = 0
    in_string = False
    escaped = False
    for i in range(start, len(text)):
        ch = text[i]
        if in_string:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
            continue
        if ch == '"':
            in_string = True
        elif ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth == 0:
                return text[start : i + 1]
    return None


def parse_llm_output(text: str) -> Union[Action, ParseFailure]:
    """Parse policy output in one of the two templates.

    Template 1 (Thought + Response, optional Answer label) yields a
    BotResponse; template 2 (Thought + Action + Action Input) yields a
    ToolCall with the optional "API_" prefix stripped from the name.
    """
    if not text or not text.strip():
        return ParseFailure("empty output")
    body = _strip_code_fences(text)
    lines = body.split("\n")

    thought = None
    for line in lines:
        if line.strip().startswith("Thought:"):
            thought = line.split("Thought:", 1)[1].strip()
            break

    action_index = next((i for i, line in enumerate(lines) if line.strip().startswith("Action:")), None)
    if action_index is not None:
        name = lines[action_index].split("Action:", 1)[1].strip()
        if name.startswith("API_"):
            name = name[len("API_"):]
        if not name:
            return ParseFailure("Action line has no function name")
        input_index = next(
            (i for i, line in enumerate(lines) if line.strip().startswith("Action Input:")), None
        )
        if input_index is None:
            return ParseFailure("Action without Action Input")
        raw_args = "\n".join([lines[input_index].split("Action Input:", 1)[1]] + lines[input_index + 1 :]).strip()
        try:
            args = json.loads(raw_args)
        except json.JSONDecodeError:
            candidate = _extract_json_object(raw_args)
            if candidate is None:
                return ParseFailure("Action Input is not valid JSON")
            try:
                args = json.loads(candidate)
            except json.JSONDecodeError:
                return ParseFailure("Action Input is not valid JSON")
        if not isinstance(args, dict):
            return ParseFailure("Action Input must be a JSON object")
        return ToolCall(name=name, args=args, thought=thought)

    response_index = next((i for i, line in enumerate(lines) if line.strip().startswith("Response:")), None)
    if response_index is None:
        return ParseFailure("output matches neither the Response nor the Action template")

    answer_node = None
    answer_match = _ANSWER_LINE_RE.search(body)
    if answer_match:
        answer_node = answer_match.group(1)

    response_lines = [lines[response_index].split("Response:", 1)[1].strip()]
    for line in lines[response_index + 1 :]:
        if _ANSWER_LINE_RE.match(line):
            continue
        response_lines.append(line)
    response_text = "\n".join(response_lines).strip()
    return BotResponse(text=response_text, answer_node=answer_node, thought=thought)


# --------------------------------------------------------------------------
# Answer-node labeling


def _tokens(text: str) -> set[str]:
    return set(_WORD_RE.findall(text.lower()))


class TemplateOverlapClassifier:
    """Match a response against ANSWER node templates by token containment.

    Score = |response tokens covered by the template| / |response tokens|.
    Ties go to the earliest declared node; scores below the threshold yield
    no label.
    """

    def __init__(self, doc: PdlDocument, threshold: float = 0.75):
        self.threshold = threshold
        self.templates: list[tuple[str, set[str]]] = []
        for node in doc.answer_nodes:
            if not node.desc:
                continue
            cleaned = re.sub(r"\$[A-Za-z_][A-Za-z0-9_]*(?:-[A-Za-z_][A-Za-z0-9_]*)?", " ", node.desc)
            self.templates.append((node.name, _tokens(cleaned)))

    def __call__(self, response_text: str) -> Optional[str]:
        response_tokens = _tokens(response_text)
        if not response_tokens:
            return None
        best_name, best_score = None, 0.0
        for name, template_tokens in self.templates:
            if not template_tokens:
                continue
            score = len(response_tokens & template_tokens) / len(response_tokens)
            if score > best_score:
                best_name, best_score = name, score
        if best_name is not None and best_score >= self.threshold:
            return best_name
        return None


class LlmLabelClassifier:
    """Ask a backend which ANSWER node a response realizes."""

    def __init__(self, backend: LlmBackend, doc: PdlDocument):
        self.backend = backend
        self.doc = doc

    def __call__(self, response_text: str) -> Optional[str]:
        options = "\n".join(
            f"- {node.name}: {node.desc or '(no template)'}" for node in self.doc.answer_nodes
        )
        prompt = (
            "Classify which of the following response templates the given reply realizes.\n"
            f"Templates:\n{options}\n\nReply:\n{response_text}\n\n"
            "Output only the template name, or NONE if none applies."
        )
        label = self.backend.complete(prompt).strip()
        if any(node.name == label for node in self.doc.answer_nodes):
            return label
        return None


def label_answer_node(response_text: str, doc: PdlDocument, classifier=None) -> Optional[str]:
    """Resolve the ANSWER node a free-text response realizes, if any.

    An explicit "Answer: <node>" line wins; otherwise the configured
    classifier is consulted. Returns None below confidence, in which case
    dependency checks on ANSWER nodes are skipped.
    """
    match = _ANSWER_LINE_RE.search(response_text)
    if match:
        name = match.group(1)
        if any(node.name == name for node in doc.answer_nodes):
            return name
    if classifier is not None:
        label = classifier(response_text)
        if label is not None:
            return label
    logger.debug("no answer-node label resolved; dependency check skipped for this response")
    return None
