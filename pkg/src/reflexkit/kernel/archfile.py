"""Reader for ``.arch`` architecture definitions.

Example::

    composite pbr {
      component server {
        implementation counter
        service counter : Counter
        property initial : int = 0
      }
      wire client.out -> server.counter
    }

``#`` starts a comment that runs to the end of the line.
"""

from __future__ import annotations

import functools
import re
from typing import Container, NamedTuple

from reflexkit.errors import ArchParseError, GraphError, UnknownBehavior
from reflexkit.kernel.model import REFERENCE, SERVICE, ArchitectureGraph, Composite, Component

# A hyphen may appear inside an identifier unless it begins an arrow.
IDENT = r"[A-Za-z_](?:[A-Za-z0-9_]|-(?!>))*"

_TOKEN_RE = re.compile(
    rf"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<int>-?[0-9]+)
  | (?P<arrow>->)
  | (?P<ident>{IDENT})
  | (?P<punct>[{{}}:=.])
    """,
    re.VERBOSE,
)


class Token(NamedTuple):
    kind: str
    text: str
    line: int
    column: int


def _shown(tok: Token) -> str:
    return repr(tok.text) if tok.text else "end of input"


@functools.lru_cache(maxsize=64)
def tokenize(text: str) -> tuple[Token, ...]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ArchParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tuple(tokens)


def _unquote(literal: str) -> str:
    return re.sub(r"\\(.)", r"\1", literal[1:-1])


class _Parser:
    def __init__(self, text: str, behaviors: Container[str] | None):
        self.tokens = tokenize(text)
        self.i = 0
        self.behaviors = behaviors
        self.graph = ArchitectureGraph()

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def error(self, message: str, tok: Token | None = None) -> ArchParseError:
        tok = tok or self.tok
        return ArchParseError(message, tok.line, tok.column)

    def expect(self, kind: str, text: str | None = None) -> Token:
        tok = self.tok
        if tok.kind != kind or (text is not None and tok.text != text):
            want = repr(text) if text else kind
            raise self.error(f"expected {want}, found {_shown(tok)}")
        self.i += 1
        return tok

    def at(self, kind: str, text: str | None = None) -> bool:
        return self.tok.kind == kind and (text is None or self.tok.text == text)

    def ident(self) -> Token:
        return self.expect("ident")

    def graph_step(self, tok: Token, fn, *args):
        # Attach source positions to structural errors raised by the model.
        try:
            return fn(*args)
        except GraphError as exc:
            raise ArchParseError(str(exc), tok.line, tok.column) from exc

    def parse(self) -> ArchitectureGraph:
        pending_wires = []
        while not self.at("eof"):
            self.composite(self.graph.root, pending_wires)
        for tok, src, dst in pending_wires:
            self.graph_step(tok, self.graph.add_wire, src, dst)
        return self.graph

    def composite(self, parent: Composite, wires: list) -> None:
        self.expect("ident", "composite")
        name = self.ident()
        node = self.graph_step(name, self.graph.add_composite, parent, name.text)
        self.expect("punct", "{")
        while not self.at("punct", "}"):
            tok = self.tok
            if self.at("ident", "component"):
                self.component(node)
            elif self.at("ident", "composite"):
                self.composite(node, wires)
            elif self.at("ident", "wire"):
                self.i += 1
                src_child, src_port = self.dotted()
                self.expect("arrow")
                dst_child, dst_port = self.dotted()
                src = self.graph.endpoint(f"{node.path}/{src_child}.{src_port}", REFERENCE)
                dst = self.graph.endpoint(f"{node.path}/{dst_child}.{dst_port}", SERVICE)
                wires.append((tok, src, dst))
            elif self.at("ident", "service") or self.at("ident", "reference"):
                kind = self.ident().text
                name_tok = self.ident()
                self.expect("ident", "promotes")
                child, port = self.dotted()
                self.graph_step(name_tok, self.graph.add_promotion, node, name_tok.text, kind, child, port)
            else:
                raise self.error(f"unexpected {_shown(tok)} in composite {node.path}")
        self.expect("punct", "}")

    def dotted(self) -> tuple[str, str]:
        child = self.ident().text
        self.expect("punct", ".")
        return child, self.ident().text

    def component(self, parent: Composite) -> None:
        self.expect("ident", "component")
        name = self.ident()
        self.expect("punct", "{")
        self.expect("ident", "implementation")
        impl = self.ident()
        if self.behaviors is not None and impl.text not in self.behaviors:
            cause = UnknownBehavior(f"unknown behavior {impl.text!r}")
            raise ArchParseError(str(cause), impl.line, impl.column) from cause
        node: Component = self.graph_step(name, self.graph.add_component, parent, name.text, impl.text)
        while not self.at("punct", "}"):
            tok = self.tok
            if self.at("ident", "service") or self.at("ident", "reference"):
                kind = self.ident().text
                port = self.ident()
                self.expect("punct", ":")
                iface = self.ident()
                self.graph_step(port, self.graph.add_port, node, port.text, iface.text, kind)
            elif self.at("ident", "property"):
                self.i += 1
                prop = self.ident()
                self.expect("punct", ":")
                type_tok = self.ident()
                self.expect("punct", "=")
                value = self.literal(type_tok)
                self.graph_step(prop, self.graph.add_property, node, prop.text, type_tok.text, value)
            elif self.at("ident", "implementation"):
                raise self.error(f"component {node.path} declares more than one implementation")
            else:
                raise self.error(f"unexpected {_shown(tok)} in component {node.path}")
        self.expect("punct", "}")

    def literal(self, type_tok: Token):
        if type_tok.text == "int":
            return int(self.expect("int").text)
        if type_tok.text == "text":
            return _unquote(self.expect("string").text)
        if type_tok.text == "bool":
            word = self.ident()
            if word.text not in ("true", "false"):
                raise self.error(f"expected true or false, found {word.text!r}", word)
            return word.text == "true"
        raise self.error(f"unknown property type {type_tok.text!r}", type_tok)


def build_graph(text: str, behaviors: Container[str] | None = None) -> ArchitectureGraph:
    """Parse an architecture definition into a graph with every component STOPPED.

    ``behaviors`` is the set of registered behavior identifiers; ``None`` skips
    that check.
    """
    return _Parser(text, behaviors).parse()
