"""Primary-backup replication: the replica-side protocol and the client.

Recovery is deliberately absent from these behaviors. A backup becomes the
serving replica only because a reconfiguration script rewires the client to it.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Any

from reflexkit.errors import BehaviorFault, InvocationError, StaleRequest, UnboundReference
from reflexkit.ftm.counter import GET_STATE, SET_STATE
from reflexkit.kernel.behavior import Behavior, Invocation, RequestId, format_request_id
from reflexkit.kernel.runtime import format_value

PRIMARY = "primary"
BACKUP = "backup"


@dataclass(frozen=True)
class Checkpoint:
    snapshot: bytes
    last: RequestId
    reply: Any = None

    def __str__(self) -> str:
        return f"checkpoint(last={format_request_id(self.last)},snapshot=0x{self.snapshot.hex()})"


class ReplicationProtocol(Behavior):
    """Non-functional half of a replica: dedup, checkpointing, heartbeat answers.

    Ports: service ``computeService`` (client traffic), ``checkpoint``,
    ``heartbeat``; references ``server`` (functional layer) and ``backup``.
    """

    def __init__(self, component, role: str = PRIMARY):
        super().__init__(component)
        self.role = role
        # client id -> (last processed sequence number, cached reply)
        self.table: dict[str, tuple[int, Any]] = {}

    def handle(self, ctx, invocation: Invocation):
        if invocation.operation == "ping":
            return "alive"
        if invocation.operation == "checkpoint":
            return self.apply_checkpoint(ctx, invocation.arguments[0])
        return self.handle_request(ctx, invocation)

    def handle_request(self, ctx, invocation: Invocation):
        if invocation.request_id is None:
            raise BehaviorFault("client requests must carry a request id")
        client, seq = invocation.request_id
        last = self.table.get(client)
        if last is not None:
            if seq == last[0]:
                return last[1]
            if seq < last[0]:
                raise StaleRequest(
                    f"request {format_request_id(invocation.request_id)} is older than {client}:{last[0]}"
                )
        value = ctx.call("server", invocation.operation, *invocation.arguments)
        snapshot = ctx.call("server", GET_STATE)
        checkpoint = Checkpoint(snapshot, invocation.request_id, value)
        rid = format_request_id(invocation.request_id)
        ctx.log("checkpoint", f"req={rid} snapshot=0x{snapshot.hex()} reply={format_value(value)}")
        try:
            ctx.call("backup", "checkpoint", checkpoint)
        except UnboundReference:
            ctx.log("warning", f"degraded req={rid} backup reference unbound")
        except InvocationError as exc:
            ctx.log("warning", f"checkpoint-failed req={rid} error={type(exc).__name__}")
        self.table[client] = (seq, value)
        return value

    def apply_checkpoint(self, ctx, checkpoint: Checkpoint) -> str:
        client, seq = checkpoint.last
        last = self.table.get(client)
        if last is not None and seq < last[0]:
            return "ack"
        ctx.call("server", SET_STATE, checkpoint.snapshot)
        self.table[client] = (seq, checkpoint.reply)
        return "ack"


@dataclass(frozen=True)
class Observed:
    request_id: RequestId
    value: Any
    time: int
    error: str | None = None


class RequestClient(Behavior):
    """Closed-loop client: at most one outstanding request, later ones wait in a backlog.

    A timed-out request is resent with the same id once introspection shows
    the ``computeService`` reference bound somewhere new.
    """

    def __init__(self, component):
        super().__init__(component)
        self.next_seq = 1
        self.backlog: deque[tuple[str, tuple]] = deque()
        self.outstanding: tuple[int, str, tuple] | None = None
        self.sent_binding: str | None = None
        self.waiting_rebind = False
        self.observed: list[Observed] = []

    @property
    def client_id(self) -> str:
        prop = self.component.properties.get("client_id")
        return prop.value if prop is not None else self.component.name

    @property
    def replies(self) -> list[Any]:
        return [o.value for o in self.observed if o.error is None]

    def op_submit(self, ctx, operation: str, *args) -> None:
        self.backlog.append((operation, args))
        self._pump(ctx)

    def _pump(self, ctx) -> None:
        if self.outstanding is not None or not self.backlog:
            return
        operation, args = self.backlog.popleft()
        self.outstanding = (self.next_seq, operation, args)
        self.next_seq += 1
        self._send(ctx)

    def _send(self, ctx) -> None:
        seq, operation, args = self.outstanding
        self.sent_binding = ctx.binding("computeService")
        deadline_prop = self.component.properties.get("deadline")
        deadline = ctx.now + (deadline_prop.value if deadline_prop is not None else 500)
        invocation = Invocation(operation, args, (self.client_id, seq), deadline)
        try:
            ctx.request("computeService", invocation)
        except UnboundReference:
            self.waiting_rebind = True
            ctx.log("warning", f"unbound req={self.client_id}:{seq} awaiting rebind")

    def _matches(self, rid: RequestId) -> bool:
        return self.outstanding is not None and rid == (self.client_id, self.outstanding[0])

    def on_reply(self, ctx, reply) -> None:
        if not self._matches(reply.request_id):
            return
        self.observed.append(Observed(reply.request_id, reply.value, ctx.now, reply.error))
        self.outstanding = None
        self._pump(ctx)

    def on_timeout(self, ctx, timeout) -> None:
        if not self._matches(timeout.request_id):
            return
        self.waiting_rebind = True
        self._maybe_resend(ctx)

    def on_start(self, ctx) -> None:
        self._maybe_resend(ctx)

    def _maybe_resend(self, ctx) -> None:
        if not self.waiting_rebind or self.outstanding is None:
            return
        current = ctx.binding("computeService")
        if current is not None and current != self.sent_binding:
            self.waiting_rebind = False
            self._send(ctx)
