"""Path evaluation, action execution and step-by-step sessions."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Iterable, Mapping

from reflexkit.errors import ReflexError, ScriptRuntimeError, StepAfterDone
from reflexkit.kernel.model import (
    REFERENCE,
    SERVICE,
    ArchitectureGraph,
    Component,
    Composite,
    Lifecycle,
    Port,
)
from reflexkit.scriptlang.ast import WILDCARD, Action, Assign, Call, PathExpr, Script, Statement

if TYPE_CHECKING:
    from reflexkit.kernel.runtime import Kernel

NodeSet = tuple
COMMIT = "commit"
TRANSACTIONAL = "transactional"
MODES = (COMMIT, TRANSACTIONAL)

StatementHook = Callable[[int, Statement], None]


def _candidates(node, axis: str) -> Iterable:
    if axis == "scachild":
        return node.children.values() if isinstance(node, Composite) else ()
    if axis == "scaservice":
        return node.services.values() if isinstance(node, (Component, Composite)) else ()
    if axis == "scareference":
        return node.references.values() if isinstance(node, (Component, Composite)) else ()
    if axis == "scaproperty":
        return node.properties.values() if isinstance(node, Component) else ()
    raise ScriptRuntimeError(f"unknown axis {axis!r}")


def eval_path(expr: PathExpr, env: Mapping[str, NodeSet], graph: ArchitectureGraph) -> NodeSet:
    """Evaluate a path to a duplicate-free node set in document order."""
    if expr.head in env:
        current = tuple(env[expr.head])
    elif expr.head == "domain":
        current = (graph.root,)
    else:
        raise ScriptRuntimeError(f"unbound variable ${expr.head}")
    for step in expr.steps:
        found = {}
        for node in current:
            for candidate in _candidates(node, step.axis):
                if step.name == WILDCARD or candidate.name == step.name:
                    found[id(candidate)] = candidate
        current = tuple(sorted(found.values(), key=lambda n: n.order))
    return current


def describe(node) -> str:
    kind = getattr(node, "kind", None)
    if isinstance(node, Port):
        return f"{kind}:{node.path}"
    if kind in ("component", "composite"):
        return f"{kind}:{node.path}"
    return f"property:{node.path}"


@dataclass(frozen=True)
class ReconfigEntry:
    index: int
    statement: str
    primitive: str
    arguments: tuple[str, ...]
    outcome: str

    @property
    def side_effecting(self) -> bool:
        return self.primitive != "assign"

    @property
    def failed(self) -> bool:
        return self.outcome.startswith("error")


class ReconfigLog(list):
    """Append-only list of :class:`ReconfigEntry`, one per executed statement."""

    def side_effects(self) -> list[ReconfigEntry]:
        return [e for e in self if e.side_effecting]


def _singleton(nodes: NodeSet, primitive: str, position: int):
    if len(nodes) != 1:
        raise ScriptRuntimeError(
            f"{primitive} argument {position} must be a single node, got {len(nodes)}"
        )
    return nodes[0]


def _port(node, kind: str, primitive: str) -> Port:
    if not isinstance(node, Port) or node.kind != kind:
        raise ScriptRuntimeError(f"{primitive} expects a {kind}, got {describe(node)}")
    return node


def execute_statement(kernel: "Kernel", stmt: Statement, env: dict, index: int) -> ReconfigEntry:
    if isinstance(stmt, Assign):
        nodes = eval_path(stmt.expr, env, kernel.graph)
        env[stmt.var] = nodes
        return ReconfigEntry(index, str(stmt), "assign", (stmt.var,) + tuple(map(describe, nodes)),
                             f"ok {len(nodes)} node(s)")
    args = []
    for pos, arg in enumerate(stmt.args, 1):
        if isinstance(arg, PathExpr):
            args.append(_singleton(eval_path(arg, env, kernel.graph), stmt.primitive, pos))
        else:
            args.append(arg.value)
    shown = tuple(a if isinstance(a, str) else describe(a) for a in args)
    outcome = "ok"
    if stmt.primitive == "set-state":
        node, state = args
        if not isinstance(node, Component):
            raise ScriptRuntimeError(f"set-state needs a component, got {describe(node)}")
        if state not in (Lifecycle.STARTED.value, Lifecycle.STOPPED.value):
            raise ScriptRuntimeError(f"set-state accepts STARTED or STOPPED, not {state!r}")
        if node.lifecycle.value == state:
            outcome = "ok no-op"
        kernel.set_lifecycle(node.path, state)
    elif stmt.primitive in ("add-scawire", "remove-scawire"):
        ref = _port(args[0], REFERENCE, stmt.primitive)
        svc = _port(args[1], SERVICE, stmt.primitive)
        if stmt.primitive == "add-scawire":
            kernel.add_wire(ref.endpoint, svc.endpoint)
        else:
            kernel.remove_wire(ref.endpoint, svc.endpoint)
    else:
        raise ScriptRuntimeError(f"unknown primitive {stmt.primitive!r}")
    return ReconfigEntry(index, str(stmt), stmt.primitive, shown, outcome)


def _bind(kernel: "Kernel", action: Action, args) -> dict:
    if len(args) != len(action.params):
        raise ScriptRuntimeError(
            f"action {action.name} takes {len(action.params)} argument(s), got {len(args)}"
        )
    env = {}
    for param, value in zip(action.params, args):
        if isinstance(value, str):
            value = (kernel.graph.node(value),)
        elif not isinstance(value, tuple):
            value = (value,)
        env[param] = value
    return env


def _lookup(script: Script, name: str) -> Action:
    action = script.action(name)
    if action is None:
        raise ScriptRuntimeError(f"unknown action {name!r}")
    return action


def run_action(
    kernel: "Kernel",
    script: Script,
    name: str,
    args=(),
    mode: str = TRANSACTIONAL,
    on_statement: StatementHook | None = None,
) -> ReconfigLog:
    """Execute every statement of an action against the kernel's graph.

    In transactional mode a failure restores the graph to its state before the
    action; in commit mode the effects of earlier statements persist. Either way
    the failure is raised as :class:`ScriptRuntimeError` carrying the log.
    ``on_statement`` runs before each statement and may raise to force a failure.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    action = _lookup(script, name)
    env = _bind(kernel, action, args)
    before = kernel.snapshot() if mode == TRANSACTIONAL else None
    log = ReconfigLog()
    for index, stmt in enumerate(action.body):
        try:
            if on_statement is not None:
                on_statement(index, stmt)
            entry = execute_statement(kernel, stmt, env, index)
        except Exception as exc:
            primitive = "assign" if isinstance(stmt, Assign) else stmt.primitive
            log.append(ReconfigEntry(index, str(stmt), primitive, (), f"error {exc}"))
            if before is not None:
                kernel.restore(before)
            raise ScriptRuntimeError(
                f"{action.name}: statement {index} `{stmt}` failed: {exc}", index, log
            ) from exc
        log.append(entry)
    return log


class StepSession:
    """Executes an action one statement per :meth:`step`, in commit mode."""

    def __init__(self, kernel: "Kernel", script: Script, name: str, args=()):
        self.kernel = kernel
        self.action = _lookup(script, name)
        self.env = _bind(kernel, self.action, args)
        self.log = ReconfigLog()
        self.index = 0
        self._finished = False

    @property
    def done(self) -> bool:
        return self._finished

    @property
    def total(self) -> int:
        return len(self.action.body)

    def next_statement(self) -> Statement | None:
        if self.index < self.total:
            return self.action.body[self.index]
        return None

    def step(self) -> ReconfigEntry | None:
        """Run the next statement; returns ``None`` once the action is complete."""
        if self._finished:
            raise StepAfterDone(f"action {self.action.name} has already finished")
        if self.index >= self.total:
            self._finished = True
            return None
        stmt = self.action.body[self.index]
        try:
            entry = execute_statement(self.kernel, stmt, self.env, self.index)
        except ReflexError as exc:
            self._finished = True
            primitive = "assign" if isinstance(stmt, Assign) else stmt.primitive
            self.log.append(ReconfigEntry(self.index, str(stmt), primitive, (), f"error {exc}"))
            raise ScriptRuntimeError(f"statement {self.index} `{stmt}` failed: {exc}",
                                     self.index, self.log) from exc
        self.log.append(entry)
        self.index += 1
        return entry
