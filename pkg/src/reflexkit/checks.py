"""Invariant sweeps over event logs."""

from __future__ import annotations

from typing import Iterable

from reflexkit.harness.eventlog import EventRecord

PASSIVE_OPS = ("reply", "timeout")


def clock_violations(records: Iterable[EventRecord]) -> list[str]:
    out, prev = [], None
    for r in records:
        if prev is not None and (r.time, r.seq) <= (prev.time, prev.seq):
            out.append(f"record {r.seq} at {r.time} does not follow {prev.seq} at {prev.time}")
        prev = r
    return out


def checkpoint_before_reply(records: Iterable[EventRecord]) -> list[str]:
    """Every successful reply for a request follows a checkpoint for that request."""
    checkpointed, out = set(), []
    for r in records:
        if r.kind == "checkpoint":
            checkpointed.add(r.fields().get("req"))
        elif r.kind == "reply" and "value" in r.fields():
            req = r.fields().get("req")
            if req not in checkpointed:
                out.append(f"reply for {req} at seq {r.seq} precedes its checkpoint")
    return out


def emission_violations(records: Iterable[EventRecord]) -> list[str]:
    """Outbound invocations from components that are not STARTED.

    Covers both quiescence (nothing emitted while STOPPED) and crash
    containment (nothing emitted after a crash).
    """
    states: dict[str, str] = {}
    out = []
    for r in records:
        fields = r.fields()
        if r.kind == "lifecycle" and "to" in fields:
            states[r.subject] = fields["to"]
        elif r.kind == "fault" and r.detail.startswith("crash"):
            states[r.subject] = "CRASHED"
        elif r.kind == "dispatch" and fields.get("op") not in PASSIVE_OPS:
            sender = fields.get("from", "harness")
            if sender != "harness" and states.get(sender, "STOPPED") != "STARTED":
                out.append(f"{sender} emitted {fields.get('op')} while {states.get(sender, 'STOPPED')} "
                           f"(seq {r.seq})")
    return out
