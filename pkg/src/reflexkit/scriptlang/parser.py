"""Lexer and recursive-descent parser for ``.rcfg`` reconfiguration scripts."""

from __future__ import annotations

import functools
import re
from typing import NamedTuple

from reflexkit.errors import ScriptSyntaxError
from reflexkit.scriptlang.ast import (
    AXES,
    PRIMITIVES,
    STATES,
    WILDCARD,
    Action,
    Assign,
    Call,
    PathExpr,
    Script,
    Step,
    StringLit,
)

BUILTIN_VARS = ("domain",)

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\f]+)
  | (?P<nl>\n)
  | (?P<comment>--[^\n]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<var>\$[A-Za-z_][A-Za-z0-9_-]*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_-]*)
  | (?P<axis_sep>::)
  | (?P<punct>[(){};,=/*])
    """,
    re.VERBOSE,
)


class Token(NamedTuple):
    kind: str
    text: str
    line: int
    column: int


@functools.lru_cache(maxsize=64)
def tokenize(text: str) -> tuple[Token, ...]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ScriptSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tuple(tokens)


def _unescape(literal: str) -> str:
    return re.sub(r"\\(.)", r"\1", literal[1:-1])


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def error(self, message: str, tok: Token | None = None) -> ScriptSyntaxError:
        tok = tok or self.tok
        return ScriptSyntaxError(message, tok.line, tok.column)

    def at(self, kind: str, text: str | None = None) -> bool:
        return self.tok.kind == kind and (text is None or self.tok.text == text)

    def expect(self, kind: str, text: str | None = None) -> Token:
        if not self.at(kind, text):
            want = repr(text) if text else kind
            got = repr(self.tok.text) if self.tok.text else "end of input"
            raise self.error(f"expected {want}, found {got}")
        tok = self.tok
        self.i += 1
        return tok

    def script(self) -> Script:
        actions = []
        seen = set()
        while not self.at("eof"):
            action = self.action()
            if action.name in seen:
                raise self.error(f"duplicate action {action.name!r}")
            seen.add(action.name)
            actions.append(action)
        return Script(tuple(actions))

    def action(self) -> Action:
        self.expect("ident", "action")
        name = self.expect("ident").text
        self.expect("punct", "(")
        params = []
        if not self.at("punct", ")"):
            params.append(self.expect("ident").text)
            while self.at("punct", ","):
                self.i += 1
                params.append(self.expect("ident").text)
        self.expect("punct", ")")
        if len(set(params)) != len(params):
            raise self.error(f"duplicate parameter in action {name!r}")
        self.expect("punct", "{")
        bound = set(params) | set(BUILTIN_VARS)
        body = []
        while not self.at("punct", "}"):
            stmt = self.statement(bound)
            if isinstance(stmt, Assign):
                bound.add(stmt.var)
            body.append(stmt)
        self.expect("punct", "}")
        return Action(name, tuple(params), tuple(body))

    def statement(self, bound: set[str]):
        head = self.expect("ident")
        if self.at("punct", "="):
            self.i += 1
            expr = self.path(bound)
            self.expect("punct", ";")
            return Assign(head.text, expr, head.line)
        if self.at("punct", "("):
            return self.call(head, bound)
        raise self.error(f"expected '=' or '(' after {head.text!r}")

    def call(self, head: Token, bound: set[str]) -> Call:
        kinds = PRIMITIVES.get(head.text)
        if kinds is None:
            raise self.error(f"unknown primitive {head.text!r}", head)
        self.expect("punct", "(")
        args = []
        if not self.at("punct", ")"):
            args.append(self.argument(bound))
            while self.at("punct", ","):
                self.i += 1
                args.append(self.argument(bound))
        self.expect("punct", ")")
        self.expect("punct", ";")
        if len(args) != len(kinds):
            raise self.error(f"{head.text} takes {len(kinds)} arguments, got {len(args)}", head)
        for arg, kind in zip(args, kinds):
            if kind == "string" and not isinstance(arg, StringLit):
                raise self.error(f"{head.text} expects a quoted string argument", head)
            if kind == "path" and not isinstance(arg, PathExpr):
                raise self.error(f"{head.text} expects a path argument", head)
        if head.text == "set-state" and args[1].value not in STATES:
            raise self.error(f"set-state accepts \"STARTED\" or \"STOPPED\", not {args[1]}", head)
        return Call(head.text, tuple(args), head.line)

    def argument(self, bound: set[str]):
        if self.at("string"):
            return StringLit(_unescape(self.expect("string").text))
        return self.path(bound)

    def path(self, bound: set[str]) -> PathExpr:
        tok = self.expect("var")
        head = tok.text[1:]
        if head not in bound:
            raise self.error(f"variable ${head} is used before it is assigned", tok)
        steps = []
        while self.at("punct", "/"):
            self.i += 1
            axis = self.expect("ident")
            if axis.text not in AXES:
                raise self.error(f"unknown axis {axis.text!r}", axis)
            self.expect("axis_sep")
            if self.at("punct", WILDCARD):
                self.i += 1
                name = WILDCARD
            else:
                name = self.expect("ident").text
            steps.append(Step(axis.text, name))
        return PathExpr(head, tuple(steps))


def parse_script(text: str) -> Script:
    """Parse script text; raises :class:`ScriptSyntaxError` with line and column."""
    return _Parser(text).script()
