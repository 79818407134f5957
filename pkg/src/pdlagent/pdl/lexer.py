"""Indentation-aware tokenizer for the procedure block."""

from __future__ import annotations

from dataclasses import dataclass

from .ast import Diagnostic, Severity

# Multi-char operators must be matched before their prefixes.
_OPERATORS = ("...", "==", "!=", ">=", "<=", ">", "<", "=", "(", ")", "[", "]", ",", ":", ".")

KEYWORDS = frozenset({"if", "elif", "else", "while", "try", "except", "not", "and", "or"})
BOOL_WORDS = {"true": True, "false": False, "True": True, "False": False}


@dataclass(frozen=True)
class Token:
    kind: str  # NAME NUMBER STRING OP COMMENT NEWLINE INDENT DEDENT EOF
    value: str
    line: int
    col: int


class Lexer:
    def __init__(self, source: str):
        self.source = source
        self.tokens: list[Token] = []
        self.diagnostics: list[Diagnostic] = []

    def error(self, code: str, message: str, line: int, col: int) -> None:
        self.diagnostics.append(Diagnostic(Severity.ERROR, code, message, line, col))

    def tokenize(self) -> list[Token]:
        indent_stack = [0]
        lines = self.source.split("\n")
        for lineno, raw in enumerate(lines, start=1):
            stripped = raw.strip()
            if not stripped:
                continue
            indent = self._measure_indent(raw, lineno)
            if indent is None:
                continue  # tab error already recorded; skip the line
            self._apply_indent(indent, indent_stack, lineno)
            before = len(self.tokens)
            self._lex_line(raw, indent, lineno)
            if len(self.tokens) > before:
                last = self.tokens[-1]
                self.tokens.append(Token("NEWLINE", "", lineno, last.col + len(last.value)))
        while len(indent_stack) > 1:
            indent_stack.pop()
            self.tokens.append(Token("DEDENT", "", len(lines) + 1, 1))
        self.tokens.append(Token("EOF", "", len(lines) + 1, 1))
        return self.tokens

    def _measure_indent(self, raw: str, lineno: int):
        indent = 0
        for ch in raw:
            if ch == " ":
                indent += 1
            elif ch == "\t":
                self.error("tab-indent", "tab characters are not allowed in indentation; use spaces", lineno, indent + 1)
                return None
            else:
                break
        return indent

    def _apply_indent(self, indent: int, stack: list[int], lineno: int) -> None:
        if indent > stack[-1]:
            stack.append(indent)
            self.tokens.append(Token("INDENT", "", lineno, 1))
        else:
            while indent < stack[-1]:
                stack.pop()
                self.tokens.append(Token("DEDENT", "", lineno, 1))
            if indent != stack[-1]:
                self.error(
                    "indentation-error",
                    "unindent does not match any outer indentation level",
                    lineno,
                    indent + 1,
                )
                # resynchronize so parsing can continue
                stack.append(indent)
                self.tokens.append(Token("INDENT", "", lineno, 1))

    def _lex_line(self, raw: str, start: int, lineno: int) -> None:
        i = start
        n = len(raw)
        emitted_any = False
        while i < n:
            ch = raw[i]
            if ch in " \t":
                i += 1
                continue
            col = i + 1
            if ch == "#":
                text = raw[i + 1 :].strip()
                if not emitted_any:
                    self.tokens.append(Token("COMMENT", text, lineno, col))
                # trailing comments after code are dropped
                return
            if ch in "'\"":
                end = self._scan_string(raw, i, lineno)
                if end is None:
                    return
                self.tokens.append(Token("STRING", raw[i + 1 : end], lineno, col))
                i = end + 1
                emitted_any = True
                continue
            if ch.isdigit():
                j = i + 1
                while j < n and (raw[j].isdigit() or raw[j] == "."):
                    # stop before an ellipsis
                    if raw[j] == "." and raw[j : j + 3] == "...":
                        break
                    j += 1
                self.tokens.append(Token("NUMBER", raw[i:j], lineno, col))
                i = j
                emitted_any = True
                continue
            if ch.isalpha() or ch == "_":
                j = i + 1
                while j < n and (raw[j].isalnum() or raw[j] == "_"):
                    j += 1
                self.tokens.append(Token("NAME", raw[i:j], lineno, col))
                i = j
                emitted_any = True
                continue
            for op in _OPERATORS:
                if raw.startswith(op, i):
                    self.tokens.append(Token("OP", op, lineno, col))
                    i += len(op)
                    emitted_any = True
                    break
            else:
                self.error("syntax-error", f"unexpected character {ch!r}", lineno, col)
                i += 1

    def _scan_string(self, raw: str, start: int, lineno: int):
        quote = raw[start]
        i = start + 1
        while i < len(raw):
            if raw[i] == "\\":
                i += 2
                continue
            if raw[i] == quote:
                return i
            i += 1
        self.error("syntax-error", "unterminated string literal", lineno, start + 1)
        return None


def tokenize(source: str) -> tuple[list[Token], list[Diagnostic]]:
    lexer = Lexer(source)
    tokens = lexer.tokenize()
    return tokens, lexer.diagnostics
