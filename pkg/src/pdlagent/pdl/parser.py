"""Recursive-descent parser for the procedure block.

The procedure grammar is a small pythonic subset: assignments (bracketed or
tuple targets), if/elif/else, while, try/except, node calls qualified by the
API/ANSWER namespaces, and full-line comments. Free natural-language text is
only legal behind a # comment; anything else is a located syntax error.
"""

from __future__ import annotations

from typing import Optional, Union

from .ast import (
    And,
    Assign,
    BoolLit,
    BracketList,
    Comment,
    Compare,
    Diagnostic,
    Expr,
    ExprStmt,
    Identifier,
    If,
    IfBranch,
    Loc,
    NodeCall,
    Not,
    NumberLit,
    Or,
    ProcedureAst,
    Severity,
    Stmt,
    StringLit,
    TryExcept,
    While,
)
from .lexer import BOOL_WORDS, Token, tokenize

_MAX_DIAGNOSTICS = 50
_COMPARE_OPS = {"==", "!=", ">", "<", ">=", "<="}
_NAMESPACES = {"API", "ANSWER"}


class _ParseAbort(Exception):
    """Internal signal used for panic-mode recovery."""


class ProcedureParser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.diagnostics: list[Diagnostic] = []

    # -- token plumbing ----------------------------------------------------

    def peek(self, offset: int = 0) -> Token:
        pos = min(self.pos + offset, len(self.tokens) - 1)
        return self.tokens[pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def check(self, kind: str, value: Optional[str] = None) -> bool:
        tok = self.peek()
        return tok.kind == kind and (value is None or tok.value == value)

    def match(self, kind: str, value: Optional[str] = None) -> Optional[Token]:
        if self.check(kind, value):
            return self.advance()
        return None

    def expect(self, kind: str, value: Optional[str] = None, what: Optional[str] = None) -> Token:
        if self.check(kind, value):
            return self.advance()
        tok = self.peek()
        wanted = what or (value if value is not None else kind.lower())
        raise self.fail(f"expected {wanted}, got {tok.value or tok.kind!r}", tok)

    def fail(self, message: str, tok: Token) -> _ParseAbort:
        if len(self.diagnostics) < _MAX_DIAGNOSTICS:
            self.diagnostics.append(Diagnostic(Severity.ERROR, "syntax-error", message, tok.line, tok.col))
        return _ParseAbort()

    def _loc(self, tok: Token) -> Loc:
        return Loc(tok.line, tok.col)

    # -- recovery ----------------------------------------------------------

    def _skip_to_line_end(self) -> None:
        while not self.check("NEWLINE") and not self.check("EOF"):
            self.advance()
        self.match("NEWLINE")
        # discard any orphaned block hanging off the broken statement
        if self.check("INDENT"):
            depth = 0
            while not self.check("EOF"):
                tok = self.advance()
                if tok.kind == "INDENT":
                    depth += 1
                elif tok.kind == "DEDENT":
                    depth -= 1
                    if depth == 0:
                        break

    # -- statements ----------------------------------------------------------

    def parse(self) -> ProcedureAst:
        statements = self._parse_statements(top_level=True)
        return ProcedureAst(statements=tuple(statements))

    def _parse_statements(self, top_level: bool = False) -> list[Stmt]:
        statements: list[Stmt] = []
        while True:
            if self.check("EOF"):
                break
            if self.check("DEDENT"):
                if top_level:
                    self.advance()  # present only after recovery resync
                    continue
                break
            if self.check("INDENT"):
                tok = self.advance()
                if len(self.diagnostics) < _MAX_DIAGNOSTICS:
                    self.diagnostics.append(
                        Diagnostic(Severity.ERROR, "indentation-error", "unexpected indent", tok.line, tok.col)
                    )
                continue
            try:
                stmt = self._parse_statement()
                if stmt is not None:
                    statements.append(stmt)
            except _ParseAbort:
                self._skip_to_line_end()
        return statements

    def _parse_statement(self) -> Optional[Stmt]:
        tok = self.peek()
        if tok.kind == "COMMENT":
            self.advance()
            self.match("NEWLINE")
            return Comment(text=tok.value, loc=self._loc(tok))
        if tok.kind == "NAME":
            if tok.value == "if":
                return self._parse_if()
            if tok.value == "while":
                return self._parse_while()
            if tok.value == "try":
                return self._parse_try()
            if tok.value in ("elif", "else", "except"):
                raise self.fail(f"{tok.value!r} without a matching block opener", tok)
        return self._parse_simple()

    def _parse_block(self) -> tuple[Stmt, ...]:
        self.expect("NEWLINE", what="end of line")
        opener = self.peek()
        if not self.match("INDENT"):
            raise self.fail("expected an indented block", opener)
        statements = self._parse_statements()
        self.expect("DEDENT", what="dedent")
        if not statements:
            raise self.fail("empty block", opener)
        return tuple(statements)

    def _parse_if(self) -> If:
        start = self.expect("NAME", "if")
        branches = []
        condition = self._parse_expression()
        self.expect("OP", ":")
        branches.append(IfBranch(condition=condition, body=self._parse_block()))
        else_block = None
        while self.check("NAME", "elif"):
            self.advance()
            condition = self._parse_expression()
            self.expect("OP", ":")
            branches.append(IfBranch(condition=condition, body=self._parse_block()))
        if self.check("NAME", "else"):
            self.advance()
            self.expect("OP", ":")
            else_block = self._parse_block()
        return If(branches=tuple(branches), else_block=else_block, loc=self._loc(start))

    def _parse_while(self) -> While:
        start = self.expect("NAME", "while")
        condition = self._parse_expression()
        self.expect("OP", ":")
        body = self._parse_block()
        return While(condition=condition, body=body, loc=self._loc(start))

    def _parse_try(self) -> TryExcept:
        start = self.expect("NAME", "try")
        self.expect("OP", ":")
        try_block = self._parse_block()
        self.expect("NAME", "except")
        self.match("NAME")  # optional exception name; ignored
        self.expect("OP", ":")
        except_block = self._parse_block()
        return TryExcept(try_block=try_block, except_block=except_block, loc=self._loc(start))

    def _parse_simple(self) -> Stmt:
        start = self.peek()
        eq_index = self._find_assignment()
        if eq_index is not None:
            targets = self._parse_targets(eq_index)
            self.expect("OP", "=")
            expr = self._parse_expression()
            self.expect("NEWLINE", what="end of line")
            return Assign(targets=targets, expr=expr, loc=self._loc(start))
        expr = self._parse_expression()
        self.expect("NEWLINE", what="end of line")
        return ExprStmt(expr=expr, loc=self._loc(start))

    def _find_assignment(self) -> Optional[int]:
        """Index of a top-level '=' on the current logical line, if any."""
        depth = 0
        i = self.pos
        while i < len(self.tokens):
            tok = self.tokens[i]
            if tok.kind in ("NEWLINE", "EOF"):
                return None
            if tok.kind == "OP":
                if tok.value in ("(", "["):
                    depth += 1
                elif tok.value in (")", "]"):
                    depth -= 1
                elif tok.value == "=" and depth == 0:
                    return i
            i += 1
        return None

    def _parse_targets(self, eq_index: int) -> tuple[str, ...]:
        targets: list[str] = []
        if self.match("OP", "["):
            if not self.check("OP", "]"):
                targets.append(self.expect("NAME", what="target name").value)
                while self.match("OP", ","):
                    targets.append(self.expect("NAME", what="target name").value)
            self.expect("OP", "]")
        else:
            targets.append(self.expect("NAME", what="target name").value)
            while self.match("OP", ","):
                targets.append(self.expect("NAME", what="target name").value)
        if self.pos != eq_index:
            raise self.fail("invalid assignment target", self.peek())
        if not targets:
            raise self.fail("empty assignment target list", self.peek())
        return tuple(targets)

    # -- expressions ---------------------------------------------------------

    def _parse_expression(self) -> Expr:
        return self._parse_or()

    def _parse_or(self) -> Expr:
        left = self._parse_and()
        while self.check("NAME", "or"):
            tok = self.advance()
            right = self._parse_and()
            left = Or(left=left, right=right, loc=self._loc(tok))
        return left

    def _parse_and(self) -> Expr:
        left = self._parse_not()
        while self.check("NAME", "and"):
            tok = self.advance()
            right = self._parse_not()
            left = And(left=left, right=right, loc=self._loc(tok))
        return left

    def _parse_not(self) -> Expr:
        if self.check("NAME", "not"):
            tok = self.advance()
            return Not(operand=self._parse_not(), loc=self._loc(tok))
        return self._parse_comparison()

    def _parse_comparison(self) -> Expr:
        left = self._parse_atom()
        tok = self.peek()
        if tok.kind == "OP" and tok.value in _COMPARE_OPS:
            self.advance()
            right = self._parse_atom()
            return Compare(op=tok.value, lhs=left, rhs=right, loc=self._loc(tok))
        return left

    def _parse_atom(self) -> Expr:
        tok = self.peek()
        if tok.kind == "NUMBER":
            self.advance()
            try:
                value: Union[int, float] = int(tok.value) if "." not in tok.value else float(tok.value)
            except ValueError:
                raise self.fail(f"invalid number literal {tok.value!r}", tok)
            return NumberLit(value=value, loc=self._loc(tok))
        if tok.kind == "STRING":
            self.advance()
            return StringLit(value=tok.value, loc=self._loc(tok))
        if tok.kind == "OP" and tok.value == "...":
            self.advance()
            return Identifier(name="...", loc=self._loc(tok))
        if tok.kind == "OP" and tok.value == "[":
            return self._parse_bracket_list()
        if tok.kind == "OP" and tok.value == "(":
            self.advance()
            inner = self._parse_expression()
            self.expect("OP", ")")
            return inner
        if tok.kind == "NAME":
            if tok.value in BOOL_WORDS:
                self.advance()
                return BoolLit(value=BOOL_WORDS[tok.value], loc=self._loc(tok))
            self.advance()
            if tok.value in _NAMESPACES and self.check("OP", "."):
                self.advance()
                name_tok = self.expect("NAME", what="node name")
                self.expect("OP", "(", what="'(' to open the call")
                args = self._parse_args()
                return NodeCall(namespace=tok.value, name=name_tok.value, args=args, loc=self._loc(tok))
            if self.check("OP", "."):
                raise self.fail(
                    f"unsupported attribute access on {tok.value!r}; only the API and ANSWER namespaces may be dotted",
                    self.peek(),
                )
            if self.check("OP", "("):
                self.advance()
                args = self._parse_args()
                return NodeCall(namespace=None, name=tok.value, args=args, loc=self._loc(tok))
            return Identifier(name=tok.value, loc=self._loc(tok))
        raise self.fail(f"unexpected token {tok.value or tok.kind!r}", tok)

    def _parse_args(self) -> tuple[Expr, ...]:
        args: list[Expr] = []
        if not self.check("OP", ")"):
            args.append(self._parse_expression())
            while self.match("OP", ","):
                args.append(self._parse_expression())
        self.expect("OP", ")")
        return tuple(args)

    def _parse_bracket_list(self) -> BracketList:
        start = self.expect("OP", "[")
        items: list[Expr] = []
        if not self.check("OP", "]"):
            items.append(self._parse_expression())
            while self.match("OP", ","):
                items.append(self._parse_expression())
        self.expect("OP", "]")
        return BracketList(items=tuple(items), loc=self._loc(start))


def parse_procedure(source: str) -> Union[ProcedureAst, list[Diagnostic]]:
    """Parse a procedure block into an AST, or return error diagnostics."""
    tokens, lex_diagnostics = tokenize(source)
    parser = ProcedureParser(tokens)
    ast = parser.parse()
    diagnostics = lex_diagnostics + parser.diagnostics
    if diagnostics:
        return diagnostics
    if not ast.statements:
        return [Diagnostic(Severity.ERROR, "empty-procedure", "procedure block contains no statements", 1, 1)]
    return ast
