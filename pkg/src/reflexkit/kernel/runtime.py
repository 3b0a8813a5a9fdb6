"""The kernel: graph edits with logging, lifecycle control and message dispatch."""

from __future__ import annotations

import json
from typing import Any, Callable, Iterable

from reflexkit.errors import (
    BehaviorFault,
    InvocationError,
    InvocationTimeout,
    KindMismatch,
    LifecycleError,
    UnboundReference,
)
from reflexkit.harness.eventlog import EventRecord
from reflexkit.harness.sim import Handle, Simulation
from reflexkit.kernel.archfile import build_graph
from reflexkit.kernel.behavior import (
    BehaviorRegistry,
    Context,
    Envelope,
    Invocation,
    Reply,
    Timeout,
    format_request_id,
)
from reflexkit.kernel.model import (
    REFERENCE,
    SERVICE,
    ArchitectureGraph,
    Component,
    Endpoint,
    GraphState,
    Lifecycle,
    NodeInfo,
)

MAX_CALL_DEPTH = 32
HARNESS = "harness"

ReplyFilter = Callable[[str, str, Any], Any]


def format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (bytes, bytearray)):
        return "0x" + bytes(value).hex()
    if value is None:
        return "none"
    return str(value).replace(" ", "")


def format_args(args: Iterable[Any]) -> str:
    return ",".join(format_value(a) for a in args) or "-"


class Kernel:
    """Runs one architecture graph inside a :class:`Simulation`.

    Public operations must be called from the simulation's thread of control:
    either between ``run_until`` calls or from inside a scheduled event.
    """

    def __init__(self, graph: ArchitectureGraph, sim: Simulation, registry: BehaviorRegistry):
        self.graph = graph
        self.sim = sim
        self.registry = registry
        self.behaviors = {c.path: registry.create(c.behavior, c) for c in graph.components()}
        self.reply_filters: list[ReplyFilter] = []
        self._pending: dict[tuple[str, Any], Handle | None] = {}

    @classmethod
    def from_text(cls, text: str, sim: Simulation, registry: BehaviorRegistry) -> "Kernel":
        return cls(build_graph(text, registry), sim, registry)

    @property
    def log(self):
        return self.sim.log

    def behavior(self, path: str):
        return self.behaviors[self.graph.component(path).path]

    def _log(self, kind: str, subject: str, detail: str) -> EventRecord:
        return self.sim.log.append(self.sim.now, kind, subject, detail)

    def _endpoint(self, ep: Endpoint | str, kind: str) -> Endpoint:
        if isinstance(ep, Endpoint):
            if ep.kind != kind:
                raise KindMismatch(f"{ep} is a {ep.kind}, expected a {kind}")
            return ep
        return self.graph.endpoint(ep, kind)

    # -- lifecycle ----------------------------------------------------------------

    def set_lifecycle(self, path: str, target: Lifecycle | str, note: str = "") -> None:
        try:
            target = Lifecycle(target)
        except ValueError:
            raise LifecycleError(f"unknown lifecycle state {target!r}") from None
        if target is Lifecycle.CRASHED:
            raise LifecycleError("CRASHED can only be reached through fault injection")
        component = self.graph.component(path)
        if component.lifecycle is Lifecycle.CRASHED:
            raise LifecycleError(f"{component.path} has crashed")
        suffix = f" {note}" if note else ""
        if component.lifecycle is target:
            self._log("lifecycle", component.path, f"no-op state={target}{suffix}")
            return
        previous = self.graph.set_lifecycle(component.path, target)
        self._log("lifecycle", component.path, f"from={previous} to={target}{suffix}")
        if target is Lifecycle.STARTED:
            self.sim.schedule(self.sim.now, self._resume, component, label=f"resume {component.path}")

    def start_all(self) -> None:
        for component in self.graph.components():
            if component.lifecycle is Lifecycle.STOPPED:
                self.set_lifecycle(component.path, Lifecycle.STARTED)

    def crash(self, path: str) -> None:
        node = self.graph.node(path)
        targets = [node] if isinstance(node, Component) else [
            c for c in self.graph.components() if c.path.startswith(node.path + "/")
        ]
        for component in targets:
            if component.lifecycle is Lifecycle.CRASHED:
                continue
            previous = component.lifecycle
            component.lifecycle = Lifecycle.CRASHED
            component.inbound.clear()
            self._log("fault", component.path, f"crash from={previous}")

    # -- wiring and properties ------------------------------------------------

    def add_wire(self, ref: Endpoint | str, svc: Endpoint | str, note: str = "") -> None:
        ref = self._endpoint(ref, REFERENCE)
        svc = self._endpoint(svc, SERVICE)
        self.graph.add_wire(ref, svc)
        self._log("graph-edit", str(ref), f"add-wire target={svc}" + (f" {note}" if note else ""))

    def remove_wire(self, ref: Endpoint | str, svc: Endpoint | str, note: str = "") -> None:
        ref = self._endpoint(ref, REFERENCE)
        svc = self._endpoint(svc, SERVICE)
        self.graph.remove_wire(ref, svc)
        self._log("graph-edit", str(ref), f"remove-wire target={svc}" + (f" {note}" if note else ""))

    def get_property(self, path: str, name: str):
        return self.graph.get_property(path, name)

    def set_property(self, path: str, name: str, value) -> None:
        self.graph.set_property(path, name, value)
        component = self.graph.component(path)
        self._log("graph-edit", component.path, f"set-property name={name} value={json.dumps(value)}")

    def introspect(self, path: str) -> NodeInfo:
        return self.graph.introspect(path)

    def validate(self) -> list[str]:
        return self.graph.validate()

    def snapshot(self) -> GraphState:
        return self.graph.snapshot()

    def restore(self, state: GraphState) -> None:
        """Bring the graph back to ``state`` through logged inverse edits."""
        wanted = dict(state.wires)
        for ref, svc in list(self.graph.wires.items()):
            if wanted.get(ref) != svc:
                self.remove_wire(ref, svc, note="rollback")
        for ref, svc in state.wires:
            if self.graph.wires.get(ref) != svc:
                self.add_wire(ref, svc, note="rollback")
        for path, name, value in state.properties:
            if self.graph.get_property(path, name) != value:
                self.set_property(path, name, value)
        for path, lifecycle in state.lifecycles:
            component = self.graph.component(path)
            if component.lifecycle.value != lifecycle:
                self.set_lifecycle(path, lifecycle, note="rollback")

    # -- messaging ------------------------------------------------------------------

    def invoke(
        self,
        source: Endpoint | str,
        invocation: Invocation,
        *,
        depth: int = 0,
        sender: str = HARNESS,
    ) -> Reply:
        """Synchronous invocation through a reference.

        A STOPPED target queues the invocation and a CRASHED one swallows it;
        either way the caller gets :class:`InvocationTimeout`.
        """
        ref = self._endpoint(source, REFERENCE)
        target = self.graph.binding(ref)
        if target is None:
            raise UnboundReference(f"reference {ref} is not wired")
        component, _ = self.graph.resolve_service(target)
        envelope = Envelope(invocation, None, sender)
        if not self._accept(component, envelope):
            raise InvocationTimeout(
                f"{component.path} is {component.lifecycle}", deadline=invocation.deadline
            )
        if depth >= MAX_CALL_DEPTH:
            raise BehaviorFault(f"call depth limit {MAX_CALL_DEPTH} exceeded at {component.path}")
        value = self._handle(component, invocation, depth + 1)
        return Reply(invocation.request_id, value, None, component.path)

    def request(self, source: Endpoint | str, invocation: Invocation, *, depth: int = 0) -> None:
        """Asynchronous request from the component owning ``source``.

        The reply, or a :class:`Timeout` at ``invocation.deadline``, is delivered
        back to that component as a message.
        """
        ref = self._endpoint(source, REFERENCE)
        caller = self.graph.component(ref.path)
        if invocation.request_id is None:
            raise ValueError("asynchronous requests need a request id")
        target = self.graph.binding(ref)
        if target is None:
            raise UnboundReference(f"reference {ref} is not wired")
        component, _ = self.graph.resolve_service(target)
        key = (caller.path, invocation.request_id)
        old = self._pending.pop(key, None)
        if old is not None:
            old.cancel()
        handle = None
        if invocation.deadline is not None:
            handle = self.sim.schedule(
                invocation.deadline, self._expire, key, invocation.deadline,
                label=f"deadline {format_request_id(invocation.request_id)}",
            )
        self._pending[key] = handle
        self._deliver(component, Envelope(invocation, caller.path, caller.path), depth)

    def post(self, path: str, operation: str, *args, at: int | None = None) -> Handle:
        """Schedule a one-way harness message to a component."""
        component = self.graph.component(path)
        envelope = Envelope(Invocation(operation, tuple(args)), None, HARNESS)
        when = self.sim.now if at is None else at
        return self.sim.schedule(when, self._deliver, component, envelope, 0, label=f"{operation} {path}")

    # -- dispatch internals -------------------------------------------------------

    def _describe(self, envelope: Envelope) -> str:
        msg = envelope.message
        if isinstance(msg, Invocation):
            return (f"op={msg.operation} args={format_args(msg.arguments)} "
                    f"from={envelope.sender} req={format_request_id(msg.request_id)}")
        if isinstance(msg, Reply):
            outcome = f"value={format_value(msg.value)}" if msg.ok else f"error={msg.error.split(':')[0]}"
            return f"op=reply {outcome} from={envelope.sender} req={format_request_id(msg.request_id)}"
        return f"op=timeout from={envelope.sender} req={format_request_id(msg.request_id)}"

    def _accept(self, component: Component, envelope: Envelope, queue_behind: bool = False) -> bool:
        """Log the arrival; returns True if the message should run now."""
        state = component.lifecycle
        if state is Lifecycle.CRASHED:
            status = "lost"
        elif state is Lifecycle.STOPPED or (queue_behind and component.inbound):
            component.inbound.append(envelope)
            status = "queued"
        else:
            status = "ok"
        self._log("dispatch", component.path, f"{self._describe(envelope)} status={status}")
        return status == "ok"

    def _deliver(self, component: Component, envelope: Envelope, depth: int = 0) -> None:
        if self._accept(component, envelope, queue_behind=True):
            self._dispatch(component, envelope, depth)

    def _handle(self, component: Component, invocation: Invocation, depth: int):
        behavior = self.behaviors[component.path]
        value = behavior.handle(Context(self, component, depth), invocation)
        for fn in self.reply_filters:
            value = fn(component.path, invocation.operation, value)
        return value

    def _dispatch(self, component: Component, envelope: Envelope, depth: int) -> None:
        msg = envelope.message
        behavior = self.behaviors[component.path]
        ctx = Context(self, component, depth + 1)
        if isinstance(msg, Invocation):
            value, error, kind = None, None, ""
            try:
                value = self._handle(component, msg, depth + 1)
            except InvocationError as exc:
                kind = type(exc).__name__
                error = f"{kind}: {exc}"
            if envelope.reply_to is not None:
                reply = Reply(msg.request_id, value, error, component.path)
                outcome = f"value={format_value(value)}" if error is None else f"error={kind}"
                self._log("reply", component.path,
                          f"req={format_request_id(msg.request_id)} {outcome} to={envelope.reply_to}")
                self.sim.schedule(self.sim.now, self._return_reply, envelope.reply_to, reply,
                                  label="reply")
            elif error is not None:
                self._log("warning", component.path, f"op={msg.operation} error={kind} {error}")
            return
        try:
            if isinstance(msg, Reply):
                behavior.on_reply(ctx, msg)
            else:
                behavior.on_timeout(ctx, msg)
        except InvocationError as exc:
            self._log("warning", component.path, f"error={type(exc).__name__} {exc}")

    def _return_reply(self, caller_path: str, reply: Reply) -> None:
        key = (caller_path, reply.request_id)
        if key not in self._pending:
            self._log("warning", caller_path, f"late-reply req={format_request_id(reply.request_id)} dropped")
            return
        handle = self._pending.pop(key)
        if handle is not None:
            handle.cancel()
        self._deliver(self.graph.component(caller_path), Envelope(reply, None, reply.source))

    def _expire(self, key: tuple[str, Any], deadline: int) -> None:
        if self._pending.pop(key, "absent") == "absent":
            return
        caller_path, rid = key
        self._log("warning", caller_path, f"timeout req={format_request_id(rid)} deadline={deadline}")
        self._deliver(self.graph.component(caller_path), Envelope(Timeout(rid, deadline), None, HARNESS))

    def _resume(self, component: Component) -> None:
        if component.lifecycle is not Lifecycle.STARTED:
            return
        behavior = self.behaviors[component.path]
        try:
            behavior.on_start(Context(self, component, 0))
        except InvocationError as exc:
            self._log("warning", component.path, f"on-start error={type(exc).__name__} {exc}")
        while component.inbound and component.lifecycle is Lifecycle.STARTED:
            envelope = component.inbound.popleft()
            self._log("dispatch", component.path, f"{self._describe(envelope)} status=dequeued")
            self._dispatch(component, envelope, 0)


def replay_edits(graph: ArchitectureGraph, records: Iterable[EventRecord]) -> ArchitectureGraph:
    """Apply the graph-changing records of a log to ``graph`` (mutated and returned)."""
    for record in records:
        fields = record.fields()
        if record.kind == "lifecycle" and "to" in fields:
            graph.component(record.subject).lifecycle = Lifecycle(fields["to"])
        elif record.kind == "fault" and record.detail.startswith("crash"):
            graph.component(record.subject).lifecycle = Lifecycle.CRASHED
        elif record.kind == "graph-edit":
            action = record.detail.split(" ", 1)[0]
            if action in ("add-wire", "remove-wire"):
                ref = graph.endpoint(record.subject, REFERENCE)
                svc = graph.endpoint(fields["target"], SERVICE)
                (graph.add_wire if action == "add-wire" else graph.remove_wire)(ref, svc)
            elif action == "set-property":
                value = json.loads(record.detail.split(" value=", 1)[1])
                graph.set_property(record.subject, fields["name"], value)
    return graph


