"""Component runtime kernel: architecture graph, lifecycle, wiring and dispatch."""

from reflexkit.kernel.archfile import build_graph
from reflexkit.kernel.behavior import (
    Behavior,
    BehaviorRegistry,
    Context,
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
    Composite,
    Endpoint,
    GraphState,
    Lifecycle,
    NodeInfo,
    Port,
    Property,
)
from reflexkit.kernel.runtime import HARNESS, MAX_CALL_DEPTH, Kernel, replay_edits

__all__ = [
    "HARNESS",
    "MAX_CALL_DEPTH",
    "REFERENCE",
    "SERVICE",
    "ArchitectureGraph",
    "Behavior",
    "BehaviorRegistry",
    "Component",
    "Composite",
    "Context",
    "Endpoint",
    "GraphState",
    "Invocation",
    "Kernel",
    "Lifecycle",
    "NodeInfo",
    "Port",
    "Property",
    "Reply",
    "Timeout",
    "build_graph",
    "format_request_id",
    "replay_edits",
]
