"""Deterministic counter used as the functional server."""

from __future__ import annotations

from reflexkit.errors import BehaviorFault
from reflexkit.kernel.behavior import Behavior

GET_STATE = "get-state"
SET_STATE = "set-state"
STATE_OPS = (GET_STATE, SET_STATE)


def encode_state(value: int) -> bytes:
    return str(value).encode("ascii")


def decode_state(snapshot: bytes) -> int:
    try:
        return int(bytes(snapshot).decode("ascii"))
    except (TypeError, ValueError, UnicodeDecodeError):
        raise BehaviorFault(f"cannot restore counter from snapshot {snapshot!r}") from None


class Counter(Behavior):
    def __init__(self, component):
        super().__init__(component)
        initial = component.properties.get("initial")
        self.value = initial.value if initial is not None else 0
        # number of increment executions, for duplicate-suppression checks
        self.executions = 0

    def op_increment(self, ctx, n: int) -> int:
        self.executions += 1
        self.value += n
        return self.value

    def op_read(self, ctx) -> int:
        return self.value

    def op_get_state(self, ctx) -> bytes:
        return encode_state(self.value)

    def op_set_state(self, ctx, snapshot: bytes) -> str:
        self.value = decode_state(snapshot)
        return "ack"
