"""Virtual clock and the deterministic event scheduler."""

from __future__ import annotations

import heapq
import itertools
import random
from typing import Any, Callable

from reflexkit.errors import SchedulingError
from reflexkit.harness.eventlog import EventLog, EventRecord


class VirtualClock:
    """Integral, monotone virtual time. Nothing here reads the wall clock."""

    def __init__(self, start: int = 0):
        if start < 0:
            raise ValueError("virtual time cannot be negative")
        self._now = start

    @property
    def now(self) -> int:
        return self._now

    def advance_to(self, t: int) -> None:
        if t < self._now:
            raise SchedulingError(f"clock cannot move back from {self._now} to {t}")
        self._now = t


class Handle:
    __slots__ = ("at", "seq", "action", "args", "label", "cancelled")

    def __init__(self, at: int, seq: int, action: Callable[..., Any], args: tuple, label: str):
        self.at = at
        self.seq = seq
        self.action = action
        self.args = args
        self.label = label
        self.cancelled = False

    def cancel(self) -> None:
        self.cancelled = True

    def __lt__(self, other: "Handle") -> bool:
        return (self.at, self.seq) < (other.at, other.seq)

    def __repr__(self) -> str:
        return f"Handle({self.label!r}, at={self.at}, seq={self.seq})"


class Simulation:
    """Owns the clock, the pending-event queue and the event log.

    Events at equal times run in the order they were scheduled.
    """

    def __init__(self, seed: int = 0):
        self.seed = seed
        # Reserved for scenarios that need randomness; no current behavior draws from it.
        self.rng = random.Random(seed)
        self.clock = VirtualClock()
        self.log = EventLog(seed)
        self._queue: list[Handle] = []
        self._counter = itertools.count()

    @property
    def now(self) -> int:
        return self.clock.now

    def schedule(self, at: int, action: Callable[..., Any], *args: Any, label: str = "") -> Handle:
        if at < self.now:
            raise SchedulingError(f"cannot schedule {label or action!r} at {at}, now is {self.now}")
        handle = Handle(at, next(self._counter), action, args, label)
        heapq.heappush(self._queue, handle)
        return handle

    def schedule_in(self, delay: int, action: Callable[..., Any], *args: Any, label: str = "") -> Handle:
        return self.schedule(self.now + delay, action, *args, label=label)

    def pending(self) -> int:
        return sum(1 for h in self._queue if not h.cancelled)

    def next_time(self) -> int | None:
        while self._queue and self._queue[0].cancelled:
            heapq.heappop(self._queue)
        return self._queue[0].at if self._queue else None

    def step(self) -> bool:
        """Dispatch the next live event. Returns False on an empty queue."""
        while self._queue:
            handle = heapq.heappop(self._queue)
            if handle.cancelled:
                continue
            self.clock.advance_to(handle.at)
            handle.action(*handle.args)
            return True
        return False

    def run_until(
        self,
        until: int | None = None,
        stop: Callable[[], bool] | None = None,
    ) -> list[EventRecord]:
        """Run in (time, sequence) order up to ``until`` or quiescence.

        With a time bound the clock finishes at the bound. ``stop`` is checked
        after every event. Returns the records appended during the call.
        """
        first = len(self.log)
        while True:
            if stop is not None and stop():
                break
            nxt = self.next_time()
            if nxt is None or (until is not None and nxt > until):
                if until is not None and until > self.now:
                    self.clock.advance_to(until)
                break
            self.step()
        return self.log.records[first:]
