"""AST and document types for PDL workflows.

Everything here is immutable after construction; equality is structural and
ignores source locations, so a reparsed canonical rendering compares equal to
the original document.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Union


class Severity(str, Enum):
    ERROR = "Error"
    WARNING = "Warning"


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    code: str
    message: str
    line: int
    col: int

    def to_json(self) -> dict:
        return {
            "severity": self.severity.value,
            "code": self.code,
            "message": self.message,
            "line": self.line,
            "col": self.col,
        }

    def __str__(self) -> str:
        return f"{self.severity.value} [{self.code}] line {self.line}, col {self.col}: {self.message}"


def has_errors(diagnostics) -> bool:
    return any(d.severity is Severity.ERROR for d in diagnostics)


def errors_only(diagnostics) -> list:
    return [d for d in diagnostics if d.severity is Severity.ERROR]


@dataclass(frozen=True)
class Loc:
    line: int
    col: int


# --------------------------------------------------------------------------
# Procedure expressions


@dataclass(frozen=True)
class Identifier:
    name: str
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class StringLit:
    value: str
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class NumberLit:
    value: Union[int, float]
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class BoolLit:
    value: bool
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Compare:
    op: str  # one of == != > < >= <=
    lhs: "Expr"
    rhs: "Expr"
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Not:
    operand: "Expr"
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class And:
    left: "Expr"
    right: "Expr"
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Or:
    left: "Expr"
    right: "Expr"
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class BracketList:
    items: tuple["Expr", ...]
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class NodeCall:
    namespace: Optional[str]  # "API", "ANSWER", or None for an unqualified call
    name: str
    args: tuple["Expr", ...]
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


Expr = Union[Identifier, StringLit, NumberLit, BoolLit, Compare, Not, And, Or, BracketList, NodeCall]


# --------------------------------------------------------------------------
# Procedure statements


@dataclass(frozen=True)
class Assign:
    targets: tuple[str, ...]
    expr: Expr
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class ExprStmt:
    expr: Expr
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Comment:
    text: str
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class IfBranch:
    condition: Expr
    body: tuple["Stmt", ...]


@dataclass(frozen=True)
class If:
    branches: tuple[IfBranch, ...]
    else_block: Optional[tuple["Stmt", ...]]
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class While:
    condition: Expr
    body: tuple["Stmt", ...]
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class TryExcept:
    try_block: tuple["Stmt", ...]
    except_block: tuple["Stmt", ...]
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)


Stmt = Union[Assign, ExprStmt, Comment, If, While, TryExcept]


@dataclass(frozen=True)
class ProcedureAst:
    statements: tuple[Stmt, ...]

    def walk_calls(self):
        """Yield every NodeCall in the procedure, in source order."""
        yield from _walk_calls_block(self.statements)


def _walk_calls_expr(expr):
    if isinstance(expr, NodeCall):
        yield expr
        for arg in expr.args:
            yield from _walk_calls_expr(arg)
    elif isinstance(expr, (And, Or)):
        yield from _walk_calls_expr(expr.left)
        yield from _walk_calls_expr(expr.right)
    elif isinstance(expr, Not):
        yield from _walk_calls_expr(expr.operand)
    elif isinstance(expr, Compare):
        yield from _walk_calls_expr(expr.lhs)
        yield from _walk_calls_expr(expr.rhs)
    elif isinstance(expr, BracketList):
        for item in expr.items:
            yield from _walk_calls_expr(item)


def _walk_calls_block(block):
    for stmt in block:
        if isinstance(stmt, Assign):
            yield from _walk_calls_expr(stmt.expr)
        elif isinstance(stmt, ExprStmt):
            yield from _walk_calls_expr(stmt.expr)
        elif isinstance(stmt, If):
            for branch in stmt.branches:
                yield from _walk_calls_expr(branch.condition)
                yield from _walk_calls_block(branch.body)
            if stmt.else_block:
                yield from _walk_calls_block(stmt.else_block)
        elif isinstance(stmt, While):
            yield from _walk_calls_expr(stmt.condition)
            yield from _walk_calls_block(stmt.body)
        elif isinstance(stmt, TryExcept):
            yield from _walk_calls_block(stmt.try_block)
            yield from _walk_calls_block(stmt.except_block)


# --------------------------------------------------------------------------
# Node definitions and documents


class NodeKind(str, Enum):
    API = "API"
    ANSWER = "ANSWER"


# $slot or $node-slot placeholders inside ANSWER response templates
PLACEHOLDER_RE = re.compile(r"\$([A-Za-z_][A-Za-z0-9_]*)(?:-([A-Za-z_][A-Za-z0-9_]*))?")


@dataclass(frozen=True)
class TemplatePlaceholder:
    node: Optional[str]  # None when the placeholder names a bare slot
    slot: str


def template_placeholders(text: str) -> tuple[TemplatePlaceholder, ...]:
    """Tokenize $slot / $node-slot placeholders out of a response template."""
    found = []
    for m in PLACEHOLDER_RE.finditer(text):
        first, second = m.group(1), m.group(2)
        if second is not None:
            found.append(TemplatePlaceholder(node=first, slot=second))
        else:
            found.append(TemplatePlaceholder(node=None, slot=first))
    return tuple(found)


@dataclass(frozen=True)
class NodeDef:
    kind: NodeKind
    name: str
    desc: Optional[str] = None
    request_slots: tuple[str, ...] = ()
    response_slots: tuple[str, ...] = ()
    preconditions: tuple[str, ...] = ()
    loc: Optional[Loc] = field(default=None, compare=False, repr=False)

    def placeholders(self) -> tuple[TemplatePlaceholder, ...]:
        return template_placeholders(self.desc) if self.desc else ()


@dataclass(frozen=True)
class PdlDocument:
    name: str
    desc: str
    detailed_desc: Optional[str]
    api_nodes: tuple[NodeDef, ...]
    answer_nodes: tuple[NodeDef, ...]
    procedure_source: str
    procedure_ast: ProcedureAst
    parse_diagnostics: tuple[Diagnostic, ...] = field(default=(), compare=False, repr=False)

    def nodes(self) -> tuple[NodeDef, ...]:
        return self.api_nodes + self.answer_nodes

    def node_names(self) -> tuple[str, ...]:
        return tuple(n.name for n in self.nodes())

    def get_node(self, name: str) -> Optional[NodeDef]:
        for node in self.nodes():
            if node.name == name:
                return node
        return None
