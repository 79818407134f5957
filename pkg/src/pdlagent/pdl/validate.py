"""Cross-reference validation for parsed PDL documents."""

from __future__ import annotations

from .ast import (
    BracketList,
    Diagnostic,
    Identifier,
    NodeKind,
    PdlDocument,
    Severity,
    StringLit,
)


def validate(doc: PdlDocument) -> list[Diagnostic]:
    """Check a parsed document for referential problems.

    Errors: duplicate node names, unknown precondition references, call sites
    naming undeclared nodes, namespace mismatches, precondition cycles, and
    response slots on ANSWER nodes. Warnings: nodes never referenced in the
    procedure and slots that appear nowhere.
    """
    diagnostics: list[Diagnostic] = list(doc.parse_diagnostics)
    all_nodes = doc.nodes()
    names = [n.name for n in all_nodes]
    declared = set(names)
    api_names = {n.name for n in doc.api_nodes}
    answer_names = {n.name for n in doc.answer_nodes}

    seen: set[str] = set()
    for node in all_nodes:
        loc = node.loc
        line, col = (loc.line, loc.col) if loc else (1, 1)
        if node.name in seen:
            diagnostics.append(
                Diagnostic(Severity.ERROR, "duplicate-node", f"duplicate node name {node.name!r}", line, col)
            )
        seen.add(node.name)
        for pre in node.preconditions:
            if pre not in declared:
                diagnostics.append(
                    Diagnostic(
                        Severity.ERROR,
                        "unknown-precondition",
                        f"node {node.name!r} lists unknown precondition {pre!r}",
                        line,
                        col,
                    )
                )
        if node.kind is NodeKind.ANSWER and node.response_slots:
            diagnostics.append(
                Diagnostic(
                    Severity.ERROR,
                    "answer-response-slots",
                    f"ANSWER node {node.name!r} must not declare response slots",
                    line,
                    col,
                )
            )

    _check_cycles(doc, declared, diagnostics)

    referenced: set[str] = set()
    for call in doc.procedure_ast.walk_calls():
        line, col = (call.loc.line, call.loc.col) if call.loc else (1, 1)
        if call.name not in declared:
            diagnostics.append(
                Diagnostic(
                    Severity.ERROR,
                    "unknown-node-reference",
                    f"procedure calls unknown node reference {call.namespace + '.' if call.namespace else ''}{call.name}",
                    line,
                    col,
                )
            )
            continue
        referenced.add(call.name)
        if call.namespace == "API" and call.name not in api_names:
            diagnostics.append(
                Diagnostic(
                    Severity.ERROR,
                    "namespace-mismatch",
                    f"{call.name!r} is called through API but declared as an ANSWER node",
                    line,
                    col,
                )
            )
        elif call.namespace == "ANSWER" and call.name not in answer_names:
            diagnostics.append(
                Diagnostic(
                    Severity.ERROR,
                    "namespace-mismatch",
                    f"{call.name!r} is called through ANSWER but declared as an API node",
                    line,
                    col,
                )
            )

    used_words = _collect_used_words(doc)
    for node in all_nodes:
        line, col = (node.loc.line, node.loc.col) if node.loc else (1, 1)
        if node.name not in referenced:
            diagnostics.append(
                Diagnostic(
                    Severity.WARNING,
                    "unused-node",
                    f"node {node.name!r} is never referenced in the procedure",
                    line,
                    col,
                )
            )
        for slot in tuple(node.request_slots) + tuple(node.response_slots):
            if slot not in used_words:
                diagnostics.append(
                    Diagnostic(
                        Severity.WARNING,
                        "unused-slot",
                        f"slot {slot!r} of node {node.name!r} is never used",
                        line,
                        col,
                    )
                )
    return diagnostics


def _check_cycles(doc: PdlDocument, declared: set[str], diagnostics: list[Diagnostic]) -> None:
    edges = {n.name: [p for p in n.preconditions if p in declared] for n in doc.nodes()}
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {name: WHITE for name in edges}
    reported: set[str] = set()

    def visit(start: str) -> None:
        stack = [(start, iter(edges[start]))]
        color[start] = GRAY
        path = [start]
        while stack:
            node, it = stack[-1]
            advanced = False
            for pre in it:
                if color[pre] == GRAY:
                    cycle = path[path.index(pre):] + [pre] if pre in path else [node, pre]
                    key = tuple(sorted(set(cycle)))
                    if key not in reported:
                        reported.add(key)
                        diagnostics.append(
                            Diagnostic(
                                Severity.ERROR,
                                "precondition-cycle",
                                "precondition cycle: " + " -> ".join(cycle),
                                1,
                                1,
                            )
                        )
                elif color[pre] == WHITE:
                    color[pre] = GRAY
                    stack.append((pre, iter(edges[pre])))
                    path.append(pre)
                    advanced = True
                    break
            if not advanced:
                stack.pop()
                path.pop()
                color[node] = BLACK

    for name in edges:
        if color[name] == WHITE:
            visit(name)


def _collect_used_words(doc: PdlDocument) -> set[str]:
    """Every identifier-ish word the procedure or the templates mention."""
    words: set[str] = set()

    def walk_expr(expr) -> None:
        if isinstance(expr, Identifier):
            words.add(expr.name)
        elif isinstance(expr, StringLit):
            words.add(expr.value)
        elif isinstance(expr, BracketList):
            for item in expr.items:
                walk_expr(item)
        elif hasattr(expr, "args"):  # NodeCall
            for arg in expr.args:
                walk_expr(arg)
        elif hasattr(expr, "operand"):  # Not
            walk_expr(expr.operand)
        elif hasattr(expr, "lhs"):  # Compare
            walk_expr(expr.lhs)
            walk_expr(expr.rhs)
        elif hasattr(expr, "left"):  # And / Or
            walk_expr(expr.left)
            walk_expr(expr.right)

    def walk_block(block) -> None:
        for stmt in block:
            if hasattr(stmt, "targets"):  # Assign
                words.update(stmt.targets)
                walk_expr(stmt.expr)
            elif hasattr(stmt, "branches"):  # If
                for branch in stmt.branches:
                    walk_expr(branch.condition)
                    walk_block(branch.body)
                if stmt.else_block:
                    walk_block(stmt.else_block)
            elif hasattr(stmt, "condition"):  # While
                walk_expr(stmt.condition)
                walk_block(stmt.body)
            elif hasattr(stmt, "try_block"):  # TryExcept
                walk_block(stmt.try_block)
                walk_block(stmt.except_block)
            elif hasattr(stmt, "expr"):  # ExprStmt
                walk_expr(stmt.expr)

    walk_block(doc.procedure_ast.statements)
    for node in doc.nodes():
        for placeholder in node.placeholders():
            words.add(placeholder.slot)
    return words
