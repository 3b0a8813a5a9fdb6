"""Fault-tolerance mechanism descriptors and applicability verdicts."""

from __future__ import annotations

from dataclasses import dataclass, field

CRASH = "crash"
TRANSIENT_VALUE = "transient-value"
FAULT_CLASSES = (CRASH, TRANSIENT_VALUE)

ADEQUATE = "adequate"
INADEQUATE = "inadequate"
INAPPLICABLE = "inapplicable"


@dataclass(frozen=True)
class FtmDescriptor:
    name: str
    fault_model: frozenset[str]
    # assumptions the mechanism needs the application to satisfy
    requires_determinism: bool
    requires_state_access: bool
    replicas: int

    def __post_init__(self):
        if not self.fault_model:
            raise ValueError("a mechanism must tolerate at least one fault class")
        unknown = set(self.fault_model) - set(FAULT_CLASSES)
        if unknown:
            raise ValueError(f"unknown fault classes {sorted(unknown)}")

    def combine(self, other: "FtmDescriptor", name: str | None = None) -> "FtmDescriptor":
        """Descriptor of two mechanisms stacked on the same function."""
        return FtmDescriptor(
            name or f"{self.name}+{other.name}",
            self.fault_model | other.fault_model,
            self.requires_determinism or other.requires_determinism,
            self.requires_state_access or other.requires_state_access,
            max(self.replicas, other.replicas),
        )


@dataclass(frozen=True)
class AppContext:
    faults: frozenset[str]
    deterministic: bool = True
    state_accessible: bool = True
    replica_budget: int = 2


@dataclass(frozen=True)
class Verdict:
    kind: str
    uncovered: frozenset[str] = field(default_factory=frozenset)
    violated: tuple[str, ...] = ()


PBR = FtmDescriptor("pbr", frozenset({CRASH}), False, True, 2)
TIME_REDUNDANCY = FtmDescriptor("time-redundancy", frozenset({TRANSIENT_VALUE}), True, True, 1)


def check_applicability(descriptor: FtmDescriptor, context: AppContext) -> Verdict:
    violated = []
    if descriptor.requires_determinism and not context.deterministic:
        violated.append("determinism")
    if descriptor.requires_state_access and not context.state_accessible:
        violated.append("state accessibility")
    if descriptor.replicas > context.replica_budget:
        violated.append("replica budget")
    if violated:
        return Verdict(INAPPLICABLE, violated=tuple(violated))
    uncovered = frozenset(context.faults) - descriptor.fault_model
    if uncovered:
        return Verdict(INADEQUATE, uncovered=uncovered)
    return Verdict(ADEQUATE)
