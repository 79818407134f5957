"""Parser for the PDL document shell.

A document is a YAML-compatible mapping: meta keys (Name/Desc/Detailed_desc),
an APIs and an ANSWERs node list, and a Procedure literal block scalar. The
shell parser is deliberately indentation-tolerant (node attributes may sit at
any depth below their item) so that both the long-form and the terse `pre:`
style parse identically.
"""

from __future__ import annotations

import re
from typing import Optional, Union

from .ast import Diagnostic, NodeDef, NodeKind, Loc, PdlDocument, ProcedureAst, Severity, has_errors
from .parser import parse_procedure

_SECTION_RE = re.compile(r"^(\s*)(APIs|ANSWERs):\s*(\[\s*\])?\s*$")
_META_RE = re.compile(r"^(\s*)(Name|Desc|Detailed_desc):\s*(.*)$")
_PROCEDURE_RE = re.compile(r"^(\s*)Procedure:\s*(\|\-?)?\s*$")
_ITEM_RE = re.compile(r"^(\s*)-\s*name:\s*(.*)$")
_ATTR_RE = re.compile(r"^(\s*)(desc|request|response|precondition|pre):\s*(.*)$")
_LIST_RE = re.compile(r"^\[(.*)\]$")

_META_FIELDS = {"Name": "name", "Desc": "desc", "Detailed_desc": "detailed_desc"}


def _strip_quotes(value: str) -> str:
    value = value.strip()
    if len(value) >= 2 and value[0] == value[-1] and value[0] in "'\"":
        return value[1:-1]
    return value


def _parse_inline_list(value: str) -> Optional[list[str]]:
    m = _LIST_RE.match(value.strip())
    if not m:
        return None
    inner = m.group(1).strip()
    if not inner:
        return []
    return [_strip_quotes(part) for part in inner.split(",")]


class _NodeBuilder:
    def __init__(self, kind: NodeKind, name: str, loc: Loc):
        self.kind = kind
        self.name = name
        self.loc = loc
        self.desc: Optional[str] = None
        self.request: list[str] = []
        self.response: list[str] = []
        self.preconditions: list[str] = []

    def build(self) -> NodeDef:
        return NodeDef(
            kind=self.kind,
            name=self.name,
            desc=self.desc,
            request_slots=tuple(self.request),
            response_slots=tuple(self.response),
            preconditions=tuple(self.preconditions),
            loc=self.loc,
        )


class _ShellParser:
    def __init__(self, source: str):
        self.lines = source.replace("\r\n", "\n").split("\n")
        self.diagnostics: list[Diagnostic] = []
        self.meta: dict[str, str] = {}
        self.api_nodes: list[NodeDef] = []
        self.answer_nodes: list[NodeDef] = []
        self.procedure_source: Optional[str] = None
        self.procedure_start_line = 0
        self.procedure_dedent = 0

    def error(self, code: str, message: str, line: int, col: int = 1) -> None:
        self.diagnostics.append(Diagnostic(Severity.ERROR, code, message, line, col))

    def warn(self, code: str, message: str, line: int, col: int = 1) -> None:
        self.diagnostics.append(Diagnostic(Severity.WARNING, code, message, line, col))

    def parse(self) -> None:
        section: Optional[NodeKind] = None
        current: Optional[_NodeBuilder] = None
        i = 0
        while i < len(self.lines):
            raw = self.lines[i]
            lineno = i + 1
            stripped = raw.strip()
            if not stripped or stripped.startswith("#"):
                i += 1
                continue

            m = _PROCEDURE_RE.match(raw)
            if m:
                self._flush(current, section)
                current = None
                section = None
                i = self._read_procedure_block(i, len(m.group(1)))
                continue

            m = _SECTION_RE.match(raw)
            if m:
                self._flush(current, section)
                current = None
                section = NodeKind.API if m.group(2) == "APIs" else NodeKind.ANSWER
                if m.group(3):  # explicit empty list, e.g. "APIs: []"
                    section = None
                i += 1
                continue

            m = _ITEM_RE.match(raw)
            if m:
                if section is None:
                    self.error("syntax-error", "node item outside of an APIs/ANSWERs section", lineno)
                    i += 1
                    continue
                self._flush(current, section)
                name = _strip_quotes(m.group(2))
                if not name:
                    self.error("syntax-error", "node item without a name", lineno)
                    current = None
                else:
                    current = _NodeBuilder(section, name, Loc(lineno, len(m.group(1)) + 1))
                i += 1
                continue

            m = _ATTR_RE.match(raw)
            if m and section is not None:
                if current is None:
                    self.error("syntax-error", f"attribute {m.group(2)!r} outside of a node item", lineno)
                else:
                    self._set_attr(current, m.group(2), m.group(3), lineno)
                i += 1
                continue

            m = _META_RE.match(raw)
            if m:
                self._flush(current, section)
                current = None
                section = None
                key = _META_FIELDS[m.group(2)]
                if key in self.meta:
                    self.warn("duplicate-key", f"duplicate {m.group(2)} entry; the last one wins", lineno)
                self.meta[key] = m.group(3).strip()
                i += 1
                continue

            self.error("syntax-error", f"unrecognized line: {stripped[:60]!r}", lineno)
            i += 1

        self._flush(current, section)

    def _set_attr(self, node: _NodeBuilder, key: str, value: str, lineno: int) -> None:
        if key == "desc":
            node.desc = value.strip()
            return
        parsed = _parse_inline_list(value)
        if parsed is None:
            self.error("syntax-error", f"expected an inline [..] list for {key!r}", lineno)
            return
        if key == "request":
            node.request = parsed
        elif key == "response":
            node.response = parsed
        else:  # precondition / pre
            node.preconditions = parsed

    def _flush(self, current: Optional[_NodeBuilder], section: Optional[NodeKind] = None) -> None:
        if current is None:
            return
        target = self.api_nodes if current.kind is NodeKind.API else self.answer_nodes
        target.append(current.build())

    def _read_procedure_block(self, key_index: int, key_indent: int) -> int:
        if self.procedure_source is not None:
            self.warn("duplicate-key", "duplicate Procedure block; the last one wins", key_index + 1)
        block: list[str] = []
        i = key_index + 1
        while i < len(self.lines):
            raw = self.lines[i]
            if raw.strip() == "":
                block.append("")
                i += 1
                continue
            indent = len(raw) - len(raw.lstrip(" "))
            if indent <= key_indent:
                break
            block.append(raw)
            i += 1
        while block and block[-1] == "":
            block.pop()
        if not block:
            self.error("missing-procedure", "Procedure block is empty", key_index + 1)
            return i
        base = min(len(line) - len(line.lstrip(" ")) for line in block if line)
        dedented = [line[base:] if line else "" for line in block]
        self.procedure_source = "\n".join(dedented) + "\n"
        self.procedure_start_line = key_index + 2
        self.procedure_dedent = base
        return i


def parse_pdl(source: str) -> Union[PdlDocument, list[Diagnostic]]:
    """Parse PDL source into a document, or return diagnostics on error.

    Node lists preserve source order. Cross-reference checks (precondition
    names, call sites, cycles) are deferred to validate(); only structural
    problems are reported here.
    """
    shell = _ShellParser(source.lstrip("﻿"))
    shell.parse()
    diagnostics = list(shell.diagnostics)

    if "name" not in shell.meta:
        diagnostics.append(Diagnostic(Severity.ERROR, "missing-name", "document has no Name entry", 1, 1))
    if "desc" not in shell.meta:
        diagnostics.append(Diagnostic(Severity.WARNING, "missing-desc", "document has no Desc entry", 1, 1))

    ast: Optional[ProcedureAst] = None
    if shell.procedure_source is None:
        diagnostics.append(
            Diagnostic(Severity.ERROR, "missing-procedure", "document has no Procedure block", 1, 1)
        )
    else:
        result = parse_procedure(shell.procedure_source)
        if isinstance(result, ProcedureAst):
            ast = result
        else:
            for d in result:
                diagnostics.append(
                    Diagnostic(
                        d.severity,
                        d.code,
                        d.message,
                        d.line + shell.procedure_start_line - 1,
                        d.col + shell.procedure_dedent,
                    )
                )

    if has_errors(diagnostics) or ast is None:
        return diagnostics

    return PdlDocument(
        name=shell.meta["name"],
        desc=shell.meta.get("desc", ""),
        detailed_desc=shell.meta.get("detailed_desc"),
        api_nodes=tuple(shell.api_nodes),
        answer_nodes=tuple(shell.answer_nodes),
        procedure_source=shell.procedure_source,
        procedure_ast=ast,
        parse_diagnostics=tuple(diagnostics),
    )
