"""Prompt-only baseline agents over alternative workflow text formats.

The same workflow can be rendered as numbered natural-language steps, as
pseudo-code with function stubs, or as a flowchart edge list. The ReAct
policy embeds one of these renderings in its prompt and, by default, runs
with every controller disabled, so differences against the guided agent are
attributable to prompts and controllers alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

from .pdl import (
    Comment,
    NodeKind,
    PdlDocument,
    build_dependency_graph,
    render_for_prompt,
    topological_order,
)
from .runtime.backends import GenParams, LlmBackend
from .runtime.prompts import render_react_prompt
from .state import SessionState
from .runtime.tools import ToolRegistry

DEFAULT_CURRENT_TIME = "2024-01-01 09:00:00"


class WorkflowFormat(str, Enum):
    NL = "NL"
    CODE = "Code"
    FLOWCHART = "Flowchart"
    PDL = "PDL"


@dataclass(frozen=True)
class RenderedWorkflow:
    format: WorkflowFormat
    text: str


def _procedure_comments(doc: PdlDocument) -> list[str]:
    comments = []
    for stmt in doc.procedure_ast.statements:
        if isinstance(stmt, Comment) and stmt.text:
            comments.append(stmt.text)
    return comments


def render_nl(doc: PdlDocument) -> RenderedWorkflow:
    """Numbered step prose derived from node descriptions and dependencies."""
    graph = build_dependency_graph(doc)
    order = topological_order(graph)
    by_name = {n.name: n for n in doc.nodes()}
    lines = [f"Workflow: {doc.name}", doc.desc]
    if doc.detailed_desc:
        lines.append(doc.detailed_desc)
    lines.append("")
    lines.append("Steps:")
    step_no = 0
    for name in order:
        node = by_name[name]
        step_no += 1
        if node.kind is NodeKind.API:
            part = f"{step_no}. Call the {node.name} API"
            if node.request_slots:
                part += f" with {', '.join(node.request_slots)}"
            if node.response_slots:
                part += f" to obtain {', '.join(node.response_slots)}"
            part += "."
        else:
            part = f"{step_no}. Reply to the user with {node.name}."
            if node.desc:
                part += f" Template: {node.desc}"
        if node.preconditions:
            part += f" Requires completing {', '.join(node.preconditions)} first."
        lines.append(part)
    comments = _procedure_comments(doc)
    if comments:
        lines.append("")
        lines.append("Notes:")
        for comment in comments:
            lines.append(f"- {comment}")
    return RenderedWorkflow(format=WorkflowFormat.NL, text="\n".join(lines) + "\n")


def render_code(doc: PdlDocument) -> RenderedWorkflow:
    """Function-signature stubs per API node followed by the procedure block."""
    lines = [f"# Workflow: {doc.name}", f"# {doc.desc}", ""]
    for node in doc.api_nodes:
        params = ", ".join(node.request_slots)
        lines.append(f"def {node.name}({params}):")
        doc_parts = []
        if node.desc:
            doc_parts.append(node.desc)
        if node.response_slots:
            doc_parts.append(f"returns: {', '.join(node.response_slots)}")
        if node.preconditions:
            doc_parts.append(f"requires: {', '.join(node.preconditions)}")
        if doc_parts:
            lines.append(f'    """{" | ".join(doc_parts)}"""')
        lines.append("    ...")
        lines.append("")
    lines.append("# Procedure")
    lines.append(doc.procedure_source.rstrip("\n"))
    return RenderedWorkflow(format=WorkflowFormat.CODE, text="\n".join(lines) + "\n")


def render_flowchart(doc: PdlDocument) -> RenderedWorkflow:
    """Mermaid-style node/edge list from the dependency graph and branches."""
    graph = build_dependency_graph(doc)
    order = topological_order(graph)
    api_names = {n.name for n in doc.api_nodes}
    lines = ["flowchart TD"]
    for name in order:
        shape = f"{name}[{name}]" if name in api_names else f"{name}({name})"
        lines.append(f"    {shape}")
    for name in order:
        for pre in sorted(graph.preconditions(name)):
            lines.append(f"    {pre} --> {name}")
    branch_edges = _branch_edges(doc)
    for source, target, label in branch_edges:
        lines.append(f"    {source} -.->|{label}| {target}")
    return RenderedWorkflow(format=WorkflowFormat.FLOWCHART, text="\n".join(lines) + "\n")


def _expr_calls(expr) -> list[str]:
    from .pdl import ProcedureAst, ExprStmt

    return [c.name for c in ProcedureAst(statements=(ExprStmt(expr=expr),)).walk_calls()]


def _expr_text(expr) -> str:
    from .pdl import (
        And, BoolLit, BracketList, Compare, Identifier, NodeCall, Not, NumberLit, Or, StringLit,
    )

    if isinstance(expr, Identifier):
        return expr.name
    if isinstance(expr, StringLit):
        return f'"{expr.value}"'
    if isinstance(expr, NumberLit):
        return str(expr.value)
    if isinstance(expr, BoolLit):
        return "true" if expr.value else "false"
    if isinstance(expr, Compare):
        return f"{_expr_text(expr.lhs)} {expr.op} {_expr_text(expr.rhs)}"
    if isinstance(expr, Not):
        return f"not {_expr_text(expr.operand)}"
    if isinstance(expr, And):
        return f"{_expr_text(expr.left)} and {_expr_text(expr.right)}"
    if isinstance(expr, Or):
        return f"{_expr_text(expr.left)} or {_expr_text(expr.right)}"
    if isinstance(expr, BracketList):
        return "[" + ", ".join(_expr_text(i) for i in expr.items) + "]"
    if isinstance(expr, NodeCall):
        prefix = f"{expr.namespace}." if expr.namespace else ""
        return f"{prefix}{expr.name}(...)"
    return "?"


def _branch_edges(doc: PdlDocument) -> list[tuple[str, str, str]]:
    """Dashed condition edges: the call whose outcome branches -> the branch's first call."""
    from .pdl import Assign, ExprStmt, If, TryExcept, While

    edges: list[tuple[str, str, str]] = []

    def first_call(block) -> str | None:
        for stmt in block:
            if isinstance(stmt, (Assign, ExprStmt)):
                calls = _expr_calls(stmt.expr)
                if calls:
                    return calls[0]
            elif isinstance(stmt, If):
                for branch in stmt.branches:
                    found = first_call(branch.body)
                    if found:
                        return found
            elif isinstance(stmt, While):
                calls = _expr_calls(stmt.condition)
                if calls:
                    return calls[0]
            elif isinstance(stmt, TryExcept):
                found = first_call(stmt.try_block)
                if found:
                    return found
        return None

    def walk(block, prev: str | None) -> str | None:
        for stmt in block:
            if isinstance(stmt, (Assign, ExprStmt)):
                calls = _expr_calls(stmt.expr)
                if calls:
                    prev = calls[-1]
            elif isinstance(stmt, If):
                for branch in stmt.branches:
                    cond_calls = _expr_calls(branch.condition)
                    source = cond_calls[-1] if cond_calls else prev
                    target = first_call(branch.body)
                    if source and target and source != target:
                        edges.append((source, target, _expr_text(branch.condition)))
                    walk(branch.body, source)
                if stmt.else_block:
                    walk(stmt.else_block, prev)
            elif isinstance(stmt, While):
                cond_calls = _expr_calls(stmt.condition)
                source = cond_calls[-1] if cond_calls else prev
                walk(stmt.body, source)
                if cond_calls:
                    prev = cond_calls[-1]
            elif isinstance(stmt, TryExcept):
                prev = walk(stmt.try_block, prev)
                walk(stmt.except_block, prev)
        return prev

    walk(doc.procedure_ast.statements, None)
    seen = set()
    unique = []
    for edge in edges:
        if edge not in seen:
            seen.add(edge)
            unique.append(edge)
    return unique


def render_pdl(doc: PdlDocument) -> RenderedWorkflow:
    return RenderedWorkflow(format=WorkflowFormat.PDL, text=render_for_prompt(doc))


_RENDERERS = {
    WorkflowFormat.NL: render_nl,
    WorkflowFormat.CODE: render_code,
    WorkflowFormat.FLOWCHART: render_flowchart,
    WorkflowFormat.PDL: render_pdl,
}


def render_workflow(doc: PdlDocument, fmt: WorkflowFormat) -> RenderedWorkflow:
    return _RENDERERS[fmt](doc)


@dataclass
class ReactPolicy:
    """Thought/Action/Observation baseline over a rendered workflow text."""

    doc: PdlDocument
    rendered: RenderedWorkflow
    registry: ToolRegistry
    backend: LlmBackend
    params: GenParams = field(default_factory=GenParams)
    current_time: str = DEFAULT_CURRENT_TIME

    @property
    def agent_kind(self) -> str:
        return f"react-{self.rendered.format.value.lower()}"

    def propose(self, state: SessionState, guidance: Iterable, scratch: Iterable[str]) -> str:
        # guidance is ignored: the ReAct prompt has no current-state section
        prompt = render_react_prompt(
            task_description=self.doc.name,
            workflow_text=self.rendered.text,
            doc=self.doc,
            state=state,
            current_time=self.current_time,
            scratch=scratch,
            api_descriptions=self.registry.descriptions(),
        )
        return self.backend.complete(prompt, self.params)


AGENT_KINDS = ("flowagent", "react-nl", "react-code", "react-fc")


def format_for_agent_kind(kind: str) -> WorkflowFormat:
    mapping = {
        "react-nl": WorkflowFormat.NL,
        "react-code": WorkflowFormat.CODE,
        "react-fc": WorkflowFormat.FLOWCHART,
    }
    if kind not in mapping:
        raise ValueError(f"no baseline format for agent kind {kind!r}")
    return mapping[kind]
