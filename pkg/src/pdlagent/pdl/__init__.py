"""PDL workflow definitions: parsing, validation, dependency graphs."""

from .ast import (
    And,
    Assign,
    BoolLit,
    BracketList,
    Comment,
    Compare,
    Diagnostic,
    ExprStmt,
    Identifier,
    If,
    IfBranch,
    NodeCall,
    NodeDef,
    NodeKind,
    Not,
    NumberLit,
    Or,
    PdlDocument,
    ProcedureAst,
    Severity,
    StringLit,
    TemplatePlaceholder,
    TryExcept,
    While,
    errors_only,
    has_errors,
    template_placeholders,
)
from .document import parse_pdl
from .graph import (
    CycleError,
    DependencyGraph,
    UnknownNodeError,
    accessible_nodes,
    build_dependency_graph,
    topological_order,
)
from .parser import parse_procedure
from .render import render_for_prompt
from .validate import validate

__all__ = [
    "And", "Assign", "BoolLit", "BracketList", "Comment", "Compare", "CycleError",
    "DependencyGraph", "Diagnostic", "ExprStmt", "Identifier", "If", "IfBranch",
    "NodeCall", "NodeDef", "NodeKind", "Not", "NumberLit", "Or", "PdlDocument",
    "ProcedureAst", "Severity", "StringLit", "TemplatePlaceholder", "TryExcept",
    "UnknownNodeError", "While", "accessible_nodes", "build_dependency_graph",
    "errors_only", "has_errors", "parse_pdl", "parse_procedure",
    "render_for_prompt", "template_placeholders", "topological_order", "validate",
]
