"""Heartbeat failure detector."""

from __future__ import annotations

from reflexkit.errors import InvocationError
from reflexkit.harness.eventlog import EventRecord
from reflexkit.kernel.behavior import Behavior

DEFAULT_PERIOD = 100
DEFAULT_THRESHOLD = 3


class HeartbeatDetector(Behavior):
    """Pings the ``primary`` reference every ``heartbeat_period`` time units.

    Suspicion latches the first time ``now - last_reply >= period * threshold``.
    """

    def __init__(self, component):
        super().__init__(component)
        self.last_reply: int | None = None
        self.suspected = False
        self.suspected_at: int | None = None
        self._ticking = False

    def _prop(self, ctx, name: str, default: int) -> int:
        return ctx.prop(name) if name in self.component.properties else default

    def on_start(self, ctx) -> None:
        if self._ticking:
            return
        self._ticking = True
        if self.last_reply is None:
            self.last_reply = ctx.now
        ctx.schedule_self(0, "tick")

    def op_tick(self, ctx) -> None:
        self.tick(ctx)
        ctx.schedule_self(self._prop(ctx, "heartbeat_period", DEFAULT_PERIOD), "tick")

    def tick(self, ctx) -> EventRecord | None:
        try:
            ctx.call("primary", "ping")
            self.last_reply = ctx.now
        except InvocationError:
            pass  # a missing reply is the signal
        if self.suspected:
            return None
        period = self._prop(ctx, "heartbeat_period", DEFAULT_PERIOD)
        threshold = self._prop(ctx, "missed_threshold", DEFAULT_THRESHOLD)
        if ctx.now - self.last_reply >= period * threshold:
            self.suspected = True
            self.suspected_at = ctx.now
            record = ctx.kernel.sim.log.append(
                ctx.now, "suspicion", ctx.path,
                f"target={ctx.binding('primary')} last-reply={self.last_reply} "
                f"period={period} threshold={threshold}",
            )
            return record
        return None
