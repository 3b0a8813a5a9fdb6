"""Time redundancy: run each request twice against restored state and compare."""

from __future__ import annotations

from reflexkit.errors import PersistentMismatch
from reflexkit.ftm.counter import GET_STATE, SET_STATE, STATE_OPS
from reflexkit.kernel.behavior import Behavior, Invocation
from reflexkit.kernel.runtime import format_value

DEFAULT_MAX_RETRIES = 1


class TimeRedundancy(Behavior):
    """Interceptor with one service and one reference ``inner`` of the same interface.

    State-transfer operations pass straight through; every other operation is
    executed twice from the same snapshot. A disagreement triggers up to
    ``max_retries`` further rounds of two executions each.
    """

    def __init__(self, component):
        super().__init__(component)
        self.mismatches = 0

    def handle(self, ctx, invocation: Invocation):
        if invocation.operation in STATE_OPS:
            return ctx.call("inner", invocation.operation, *invocation.arguments)
        prop = self.component.properties.get("max_retries")
        return self.tr_invoke(ctx, invocation, prop.value if prop else DEFAULT_MAX_RETRIES)

    def tr_invoke(self, ctx, invocation: Invocation, max_retries: int):
        op, args = invocation.operation, invocation.arguments
        snapshot = ctx.call("inner", GET_STATE)
        for round_no in range(1, max_retries + 2):
            if round_no > 1:
                ctx.call("inner", SET_STATE, snapshot)
            first = ctx.call("inner", op, *args)
            ctx.call("inner", SET_STATE, snapshot)
            second = ctx.call("inner", op, *args)
            if first == second:
                return first
            self.mismatches += 1
            ctx.log("warning", f"tr-mismatch round={round_no} first={format_value(first)} "
                               f"second={format_value(second)}")
        # leave the inner state as if the request never ran
        ctx.call("inner", SET_STATE, snapshot)
        raise PersistentMismatch(f"{op} disagreed in all {max_retries + 1} rounds")
