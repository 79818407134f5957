"""Canonical text serialization of PDL documents.

The rendering is a fixpoint: parse(render(doc)) is structurally equal to doc,
and rendering the reparsed document reproduces the same bytes.
"""

from __future__ import annotations

from .ast import NodeDef, PdlDocument

_INDENT_ITEM = "  - "
_INDENT_ATTR = "    "


def _render_list(items) -> str:
    return "[" + ", ".join(items) + "]"


def _render_node(node: NodeDef, lines: list[str]) -> None:
    lines.append(f"{_INDENT_ITEM}name: {node.name}")
    if node.desc is not None:
        lines.append(f"{_INDENT_ATTR}desc: {node.desc}")
    if node.kind.value == "API":
        lines.append(f"{_INDENT_ATTR}request: {_render_list(node.request_slots)}")
        lines.append(f"{_INDENT_ATTR}response: {_render_list(node.response_slots)}")
        lines.append(f"{_INDENT_ATTR}precondition: {_render_list(node.preconditions)}")
    else:
        if node.request_slots:
            lines.append(f"{_INDENT_ATTR}request: {_render_list(node.request_slots)}")
        if node.preconditions:
            lines.append(f"{_INDENT_ATTR}precondition: {_render_list(node.preconditions)}")


def render_for_prompt(doc: PdlDocument) -> str:
    """Serialize a document: meta, APIs, ANSWERs, Procedure, in that order."""
    lines: list[str] = [f"Name: {doc.name}", f"Desc: {doc.desc}"]
    if doc.detailed_desc is not None:
        lines.append(f"Detailed_desc: {doc.detailed_desc}")
    lines.append("")

    if doc.api_nodes:
        lines.append("APIs:")
        for node in doc.api_nodes:
            _render_node(node, lines)
    else:
        lines.append("APIs: []")
    lines.append("")

    if doc.answer_nodes:
        lines.append("ANSWERs:")
        for node in doc.answer_nodes:
            _render_node(node, lines)
    else:
        lines.append("ANSWERs: []")
    lines.append("")

    lines.append("Procedure: |")
    for proc_line in doc.procedure_source.rstrip("\n").split("\n"):
        lines.append(f"  {proc_line}" if proc_line else "")
    return "\n".join(lines) + "\n"
