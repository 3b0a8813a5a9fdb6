"""Crash and transient-value fault injection."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

from reflexkit.errors import FaultPlanError, GraphError

if TYPE_CHECKING:
    from reflexkit.kernel.runtime import Kernel


@dataclass(frozen=True)
class CrashFault:
    path: str
    time: int

    def __post_init__(self):
        if self.time < 0:
            raise FaultPlanError(f"crash time must be non-negative, got {self.time}")


@dataclass(frozen=True)
class TransientFault:
    """Flip the lowest bit of the ``nth`` integer reply produced by ``path``."""

    path: str
    nth: int

    def __post_init__(self):
        if self.nth < 1:
            raise FaultPlanError(f"transient index must be >= 1, got {self.nth}")


@dataclass
class FaultPlan:
    crashes: list[CrashFault] = field(default_factory=list)
    transients: list[TransientFault] = field(default_factory=list)


def flip_lowest_bit(value: int) -> int:
    return value ^ 1


def is_integer_reply(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


class FaultInjector:
    """Applies a :class:`FaultPlan` to a running kernel.

    Transient faults count integer replies per component; replies of other
    types (state snapshots, acknowledgements) are neither counted nor corrupted.
    """

    def __init__(self, kernel: "Kernel", plan: FaultPlan | None = None):
        self.kernel = kernel
        self.plan = FaultPlan()
        self._reply_counts: dict[str, int] = {}
        self._targets: dict[str, set[int]] = {}
        kernel.reply_filters.append(self._filter)
        if plan is not None:
            for crash in plan.crashes:
                self.inject_crash(crash)
            for transient in plan.transients:
                self.inject_transient(transient)

    def _resolve(self, path: str) -> str:
        try:
            return self.kernel.graph.node(path).path
        except GraphError as exc:
            raise FaultPlanError(f"invalid fault target: {exc}") from None

    def inject_crash(self, fault: CrashFault) -> FaultPlan:
        path = self._resolve(fault.path)
        self.kernel.sim.schedule(fault.time, self.kernel.crash, path, label=f"crash {path}")
        self.plan.crashes.append(CrashFault(path, fault.time))
        return self.plan

    def inject_transient(self, fault: TransientFault) -> FaultPlan:
        path = self._resolve(fault.path)
        if not hasattr(self.kernel.graph.node(path), "lifecycle"):
            raise FaultPlanError(f"transient faults target components, {path} is a composite")
        self._targets.setdefault(path, set()).add(fault.nth)
        self.plan.transients.append(TransientFault(path, fault.nth))
        return self.plan

    def _filter(self, path: str, operation: str, value: Any) -> Any:
        if not is_integer_reply(value) or path not in self._targets:
            return value
        n = self._reply_counts.get(path, 0) + 1
        self._reply_counts[path] = n
        if n not in self._targets[path]:
            return value
        corrupted = flip_lowest_bit(value)
        self.kernel.sim.log.append(
            self.kernel.sim.now, "fault", path,
            f"transient nth={n} op={operation} value={value} corrupted={corrupted}",
        )
        return corrupted
