"""The architecture graph: composites, components, ports, properties and wires.

Everything here is a plain data model with structural checks. Logging and
message dispatch live in :mod:`reflexkit.kernel.runtime`.
"""

from __future__ import annotations

import functools
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Union

from reflexkit.errors import (
    DuplicateName,
    InterfaceMismatch,
    KindMismatch,
    LifecycleError,
    NoSuchWire,
    OccupiedReference,
    PropertyError,
    UnresolvedPath,
)

ROOT = "domain"
SERVICE = "service"
REFERENCE = "reference"

PROPERTY_TYPES = ("int", "text", "bool")


class Lifecycle(str, Enum):
    STARTED = "STARTED"
    STOPPED = "STOPPED"
    CRASHED = "CRASHED"  # harness-only

    def __str__(self) -> str:
        return self.value


def check_property_value(type_name: str, value) -> bool:
    if type_name == "int":
        return isinstance(value, int) and not isinstance(value, bool)
    if type_name == "text":
        return isinstance(value, str)
    if type_name == "bool":
        return isinstance(value, bool)
    raise PropertyError(f"unknown property type {type_name!r}")


@dataclass(eq=False)
class Port:
    name: str
    interface: str
    kind: str
    owner: "Node"
    order: int
    # (child name, child port name) when a composite promotes a child's port
    promotes: tuple[str, str] | None = None

    @property
    def endpoint(self) -> "Endpoint":
        return Endpoint(self.owner.path, self.name, self.kind)

    @property
    def path(self) -> str:
        return f"{self.owner.path}.{self.name}"

    def __repr__(self) -> str:
        return f"<{self.kind} {self.path}: {self.interface}>"


@dataclass(eq=False)
class Property:
    name: str
    type: str
    value: Union[int, str, bool]
    owner: "Component"
    order: int

    @property
    def path(self) -> str:
        return f"{self.owner.path}@{self.name}"

    def __repr__(self) -> str:
        return f"<property {self.path} = {self.value!r}>"


@dataclass(eq=False)
class Component:
    name: str
    path: str
    behavior: str
    order: int
    parent: "Composite | None" = None
    lifecycle: Lifecycle = Lifecycle.STOPPED
    services: dict[str, Port] = field(default_factory=dict)
    references: dict[str, Port] = field(default_factory=dict)
    properties: dict[str, Property] = field(default_factory=dict)
    inbound: deque = field(default_factory=deque)

    kind = "component"

    def port(self, name: str) -> Port | None:
        return self.services.get(name) or self.references.get(name)

    def __repr__(self) -> str:
        return f"<component {self.path} {self.lifecycle}>"


@dataclass(eq=False)
class Composite:
    name: str
    path: str
    order: int
    parent: "Composite | None" = None
    children: dict[str, "Node"] = field(default_factory=dict)
    services: dict[str, Port] = field(default_factory=dict)
    references: dict[str, Port] = field(default_factory=dict)

    kind = "composite"

    def port(self, name: str) -> Port | None:
        return self.services.get(name) or self.references.get(name)

    def __repr__(self) -> str:
        return f"<composite {self.path}>"


Node = Union[Component, Composite]


@dataclass(frozen=True)
class Endpoint:
    path: str
    port: str
    kind: str

    def __str__(self) -> str:
        return f"{self.path}.{self.port}"


@dataclass(frozen=True)
class PortInfo:
    name: str
    interface: str
    target: str | None = None


@dataclass(frozen=True)
class NodeInfo:
    """Read-only introspection descriptor of a component or composite."""

    name: str
    path: str
    kind: str
    lifecycle: str | None
    services: tuple[PortInfo, ...]
    references: tuple[PortInfo, ...]
    properties: dict
    children: tuple[str, ...]

    def reference(self, name: str) -> PortInfo:
        for ref in self.references:
            if ref.name == name:
                return ref
        raise KeyError(name)


@dataclass(frozen=True)
class GraphState:
    """Mutable part of a graph, used for snapshots and deep comparison."""

    lifecycles: tuple[tuple[str, str], ...]
    wires: tuple[tuple[Endpoint, Endpoint], ...]
    properties: tuple[tuple[str, str, object], ...]


@functools.lru_cache(maxsize=4096)
def normalize_path(path: str) -> str:
    parts = [p for p in path.strip().split("/") if p]
    if not parts or parts[0] != ROOT:
        parts.insert(0, ROOT)
    return "/".join(parts)


class ArchitectureGraph:
    def __init__(self):
        self._order = 0
        self.root = Composite(ROOT, ROOT, self._next_order())
        self.nodes: dict[str, Node] = {ROOT: self.root}
        self.wires: dict[Endpoint, Endpoint] = {}

    def _next_order(self) -> int:
        n = self._order
        self._order += 1
        return n

    # -- construction ---------------------------------------------------------

    def add_composite(self, parent: Composite, name: str) -> Composite:
        self._check_child_name(parent, name)
        node = Composite(name, f"{parent.path}/{name}", self._next_order(), parent)
        parent.children[name] = node
        self.nodes[node.path] = node
        return node

    def add_component(self, parent: Composite, name: str, behavior: str) -> Component:
        self._check_child_name(parent, name)
        node = Component(name, f"{parent.path}/{name}", behavior, self._next_order(), parent)
        parent.children[name] = node
        self.nodes[node.path] = node
        return node

    def _check_child_name(self, parent: Composite, name: str) -> None:
        if name in parent.children:
            raise DuplicateName(f"duplicate child {name!r} in composite {parent.path}")

    def add_port(self, component: Component, name: str, interface: str, kind: str) -> Port:
        if component.port(name) is not None:
            raise DuplicateName(f"duplicate port {name!r} on {component.path}")
        port = Port(name, interface, kind, component, self._next_order())
        (component.services if kind == SERVICE else component.references)[name] = port
        return port

    def add_property(self, component: Component, name: str, type_name: str, value) -> Property:
        if name in component.properties:
            raise DuplicateName(f"duplicate property {name!r} on {component.path}")
        if type_name not in PROPERTY_TYPES:
            raise PropertyError(f"unknown property type {type_name!r}")
        if not check_property_value(type_name, value):
            raise PropertyError(f"property {name!r} declared {type_name} but given {value!r}")
        prop = Property(name, type_name, value, component, self._next_order())
        component.properties[name] = prop
        return prop

    def add_promotion(self, composite: Composite, name: str, kind: str, child: str, port: str) -> Port:
        if composite.port(name) is not None:
            raise DuplicateName(f"duplicate promoted port {name!r} on {composite.path}")
        target_node = composite.children.get(child)
        if target_node is None:
            raise UnresolvedPath(f"promotion of unknown child {child!r} in {composite.path}")
        target = target_node.port(port)
        if target is None or target.kind != kind:
            raise UnresolvedPath(f"{target_node.path} has no {kind} {port!r} to promote")
        promoted = Port(name, target.interface, kind, composite, self._next_order(), (child, port))
        (composite.services if kind == SERVICE else composite.references)[name] = promoted
        return promoted

    # -- lookup ---------------------------------------------------------------

    def node(self, path: str) -> Node:
        try:
            return self.nodes[normalize_path(path)]
        except KeyError:
            raise UnresolvedPath(f"no node at {path!r}") from None

    def component(self, path: str) -> Component:
        node = self.node(path)
        if not isinstance(node, Component):
            raise KindMismatch(f"{node.path} is a composite, not a component")
        return node

    def components(self) -> Iterator[Component]:
        """All components in document order."""
        return (n for n in sorted(self.nodes.values(), key=lambda n: n.order) if isinstance(n, Component))

    def endpoint(self, text: str, kind: str) -> Endpoint:
        path, _, port = text.rpartition(".")
        return Endpoint(normalize_path(path), port, kind)

    def port(self, endpoint: Endpoint) -> Port:
        node = self.node(endpoint.path)
        port = node.port(endpoint.port)
        if port is None:
            raise UnresolvedPath(f"no port {endpoint.port!r} on {node.path}")
        if port.kind != endpoint.kind:
            raise KindMismatch(f"{port.path} is a {port.kind}, not a {endpoint.kind}")
        return port

    def binding(self, ref: Endpoint) -> Endpoint | None:
        """Service endpoint a reference is effectively wired to, following promotions upward."""
        port = self.port(ref)
        while True:
            ep = port.endpoint
            if ep in self.wires:
                return self.wires[ep]
            parent = port.owner.parent
            if parent is None:
                return None
            for candidate in parent.references.values():
                if candidate.promotes == (port.owner.name, port.name):
                    port = candidate
                    break
            else:
                return None

    def resolve_service(self, svc: Endpoint) -> tuple[Component, Port]:
        """Follow promotions downward to the implementing component."""
        port = self.port(svc)
        while isinstance(port.owner, Composite):
            child, name = port.promotes
            port = port.owner.children[child].port(name)
        return port.owner, port

    # -- wiring -----------------------------------------------------------------

    def add_wire(self, ref: Endpoint, svc: Endpoint) -> None:
        if ref.kind != REFERENCE:
            raise KindMismatch(f"wire source {ref} must be a reference")
        if svc.kind != SERVICE:
            raise KindMismatch(f"wire target {svc} must be a service")
        ref_port = self.port(ref)
        svc_port = self.port(svc)
        if ref_port.endpoint in self.wires:
            raise OccupiedReference(f"reference {ref} is already wired to {self.wires[ref_port.endpoint]}")
        if ref_port.interface != svc_port.interface:
            raise InterfaceMismatch(
                f"cannot wire {ref} ({ref_port.interface}) to {svc} ({svc_port.interface})"
            )
        self.wires[ref_port.endpoint] = svc_port.endpoint

    def remove_wire(self, ref: Endpoint, svc: Endpoint) -> None:
        ref_ep = self.port(ref).endpoint
        svc_ep = self.port(svc).endpoint
        if self.wires.get(ref_ep) != svc_ep:
            raise NoSuchWire(f"no wire {ref} -> {svc}")
        del self.wires[ref_ep]

    # -- lifecycle and properties ----------------------------------------------

    def set_lifecycle(self, path: str, target: Lifecycle) -> Lifecycle:
        """Set the lifecycle, returning the previous value."""
        component = self.component(path)
        previous = component.lifecycle
        if previous is Lifecycle.CRASHED:
            raise LifecycleError(f"{component.path} has crashed")
        component.lifecycle = target
        return previous

    def get_property(self, path: str, name: str):
        component = self.component(path)
        try:
            return component.properties[name].value
        except KeyError:
            raise PropertyError(f"{component.path} declares no property {name!r}") from None

    def set_property(self, path: str, name: str, value) -> None:
        component = self.component(path)
        prop = component.properties.get(name)
        if prop is None:
            raise PropertyError(f"{component.path} declares no property {name!r}")
        if not check_property_value(prop.type, value):
            raise PropertyError(f"type mismatch: {prop.path} is {prop.type}, got {value!r}")
        prop.value = value

    # -- introspection ------------------------------------------------------------

    def introspect(self, path: str) -> NodeInfo:
        node = self.node(path)
        services = tuple(PortInfo(p.name, p.interface) for p in node.services.values())
        references = []
        for p in node.references.values():
            target = self.binding(p.endpoint)
            references.append(PortInfo(p.name, p.interface, str(target) if target else None))
        if isinstance(node, Component):
            return NodeInfo(
                node.name, node.path, node.kind, node.lifecycle.value, services,
                tuple(references), {k: p.value for k, p in node.properties.items()}, (),
            )
        return NodeInfo(
            node.name, node.path, node.kind, None, services, tuple(references), {},
            tuple(node.children),
        )

    def validate(self) -> list[str]:
        """Sweep every structural invariant; returns the list of violations."""
        problems = []
        seen_refs = set()
        for ref, svc in self.wires.items():
            try:
                ref_port = self.port(ref)
                svc_port = self.port(svc)
            except Exception as exc:
                problems.append(f"dangling wire {ref} -> {svc}: {exc}")
                continue
            if ref_port.interface != svc_port.interface:
                problems.append(f"interface mismatch on wire {ref} -> {svc}")
            if ref in seen_refs:
                problems.append(f"reference {ref} has more than one wire")
            seen_refs.add(ref)
        for path, node in self.nodes.items():
            if node.path != path:
                problems.append(f"registry key {path} does not match node path {node.path}")
            if node.parent is not None and node.parent.children.get(node.name) is not node:
                problems.append(f"{path} is not registered in its parent")
            if isinstance(node, Composite):
                for port in list(node.services.values()) + list(node.references.values()):
                    child = node.children.get(port.promotes[0])
                    if child is None or child.port(port.promotes[1]) is None:
                        problems.append(f"promotion {port.path} points at a missing port")
            else:
                names = list(node.services) + list(node.references)
                if len(names) != len(set(names)):
                    problems.append(f"duplicate port names on {path}")
                if node.lifecycle not in Lifecycle:
                    problems.append(f"bad lifecycle on {path}")
        return problems

    # -- snapshots ---------------------------------------------------------------

    def snapshot(self) -> GraphState:
        comps = list(self.components())
        return GraphState(
            lifecycles=tuple((c.path, c.lifecycle.value) for c in comps),
            wires=tuple(sorted(self.wires.items(), key=lambda kv: (str(kv[0]), str(kv[1])))),
            properties=tuple(
                (c.path, p.name, p.value) for c in comps for p in c.properties.values()
            ),
        )

    def dump(self) -> str:
        """Canonical text form: one sorted line per node, port, property and wire."""
        lines = []
        for path, node in self.nodes.items():
            if isinstance(node, Component):
                lines.append(f"component {path} {node.lifecycle.value} impl={node.behavior}")
                for prop in node.properties.values():
                    lines.append(f"property {path} {prop.name} {prop.type} {prop.value!r}")
            else:
                lines.append(f"composite {path}")
            for port in list(node.services.values()) + list(node.references.values()):
                suffix = f" promotes {port.promotes[0]}.{port.promotes[1]}" if port.promotes else ""
                lines.append(f"{port.kind} {port.path} {port.interface}{suffix}")
        for ref, svc in self.wires.items():
            lines.append(f"wire {ref} -> {svc}")
        return "".join(line + "\n" for line in sorted(lines))

    def counts(self) -> tuple[int, int]:
        return sum(1 for _ in self.components()), len(self.wires)
