"""Deterministic virtual-time harness: scheduler, event log and fault injection."""

from reflexkit.harness.eventlog import KINDS, EventLog, EventRecord
from reflexkit.harness.sim import Handle, Simulation, VirtualClock
from reflexkit.harness.faults import (
    CrashFault,
    FaultInjector,
    FaultPlan,
    TransientFault,
    flip_lowest_bit,
)

__all__ = [
    "KINDS",
    "CrashFault",
    "EventLog",
    "EventRecord",
    "FaultInjector",
    "FaultPlan",
    "Handle",
    "Simulation",
    "TransientFault",
    "VirtualClock",
    "flip_lowest_bit",
]
