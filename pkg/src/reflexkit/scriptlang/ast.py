"""Syntax tree of reconfiguration scripts and its canonical printer."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

AXES = ("scachild", "scaservice", "scareference", "scaproperty")
PRIMITIVES = {
    # name -> argument kinds, "path" or "string"
    "set-state": ("path", "string"),
    "add-scawire": ("path", "path"),
    "remove-scawire": ("path", "path"),
}
STATES = ("STARTED", "STOPPED")
WILDCARD = "*"


@dataclass(frozen=True)
class Step:
    axis: str
    name: str


@dataclass(frozen=True)
class PathExpr:
    head: str
    steps: tuple[Step, ...] = ()

    def __str__(self) -> str:
        return "$" + self.head + "".join(f"/{s.axis}::{s.name}" for s in self.steps)


@dataclass(frozen=True)
class StringLit:
    value: str

    def __str__(self) -> str:
        return '"' + self.value.replace("\\", "\\\\").replace('"', '\\"') + '"'


Expr = Union[PathExpr, StringLit]


@dataclass(frozen=True)
class Assign:
    var: str
    expr: PathExpr
    line: int = field(default=0, compare=False)

    def __str__(self) -> str:
        return f"{self.var} = {self.expr};"


@dataclass(frozen=True)
class Call:
    primitive: str
    args: tuple[Expr, ...]
    line: int = field(default=0, compare=False)

    def __str__(self) -> str:
        return f"{self.primitive}({', '.join(str(a) for a in self.args)});"


Statement = Union[Assign, Call]


@dataclass(frozen=True)
class Action:
    name: str
    params: tuple[str, ...]
    body: tuple[Statement, ...]

    @property
    def assignments(self) -> int:
        return sum(isinstance(s, Assign) for s in self.body)

    @property
    def calls(self) -> int:
        return sum(isinstance(s, Call) for s in self.body)


@dataclass(frozen=True)
class Script:
    actions: tuple[Action, ...]

    def action(self, name: str) -> Action | None:
        for action in self.actions:
            if action.name == name:
                return action
        return None

    def names(self) -> list[str]:
        return [a.name for a in self.actions]


def format_script(script: Script) -> str:
    out = []
    for action in script.actions:
        out.append(f"action {action.name}({', '.join(action.params)}) {{")
        out.extend(f"  {stmt}" for stmt in action.body)
        out.append("}")
    return "".join(line + "\n" for line in out)
