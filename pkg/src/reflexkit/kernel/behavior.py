"""Messages, the behavior base class and the behavior registry."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, Callable, Iterator, Union

from reflexkit.errors import BehaviorFault, LifecycleError, UnknownBehavior
from reflexkit.kernel.model import REFERENCE, Component, Endpoint, Lifecycle

if TYPE_CHECKING:
    from reflexkit.kernel.runtime import Kernel

RequestId = tuple[str, int]


def format_request_id(rid: RequestId | None) -> str:
    return "-" if rid is None else f"{rid[0]}:{rid[1]}"


@dataclass(frozen=True)
class Invocation:
    operation: str
    arguments: tuple = ()
    request_id: RequestId | None = None
    deadline: int | None = None


@dataclass(frozen=True)
class Reply:
    request_id: RequestId | None
    value: Any
    error: str | None = None
    source: str = ""

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True)
class Timeout:
    request_id: RequestId
    deadline: int


Message = Union[Invocation, Reply, Timeout]


@dataclass(frozen=True)
class Envelope:
    message: Message
    reply_to: str | None
    sender: str


class Context:
    """What a behavior sees of the kernel while one of its messages is dispatched."""

    __slots__ = ("kernel", "component", "depth")

    def __init__(self, kernel: "Kernel", component: Component, depth: int):
        self.kernel = kernel
        self.component = component
        self.depth = depth

    @property
    def now(self) -> int:
        return self.kernel.sim.now

    @property
    def path(self) -> str:
        return self.component.path

    def prop(self, name: str):
        return self.kernel.graph.get_property(self.path, name)

    def _check_started(self) -> None:
        if self.component.lifecycle is not Lifecycle.STARTED:
            raise LifecycleError(f"{self.path} is {self.component.lifecycle} and may not emit")

    def _ref(self, name: str) -> Endpoint:
        return Endpoint(self.path, name, REFERENCE)

    def call(self, reference: str, operation: str, *args, request_id: RequestId | None = None):
        """Synchronous nested invocation; returns the reply value or raises."""
        self._check_started()
        reply = self.kernel.invoke(
            self._ref(reference), Invocation(operation, args, request_id),
            depth=self.depth, sender=self.path,
        )
        return reply.value

    def request(self, reference: str, invocation: Invocation) -> None:
        """Asynchronous request; the reply or a timeout comes back as a message."""
        self._check_started()
        self.kernel.request(self._ref(reference), invocation, depth=self.depth)

    def schedule_self(self, delay: int, operation: str, *args):
        return self.kernel.post(self.path, operation, *args, at=self.now + delay)

    def binding(self, reference: str) -> str | None:
        target = self.kernel.graph.binding(self._ref(reference))
        return str(target) if target else None

    def log(self, kind: str, detail: str) -> None:
        self.kernel.sim.log.append(self.now, kind, self.path, detail)


class Behavior:
    """Implementation attached to a component.

    Operations map to ``op_<name>`` methods (hyphens become underscores);
    override :meth:`handle` for anything more dynamic.
    """

    def __init__(self, component: Component):
        self.component = component

    def handle(self, ctx: Context, invocation: Invocation):
        method = getattr(self, "op_" + invocation.operation.replace("-", "_"), None)
        if method is None:
            raise BehaviorFault(f"{self.component.path} has no operation {invocation.operation!r}")
        return method(ctx, *invocation.arguments)

    def on_start(self, ctx: Context) -> None:
        """Called after every transition into STARTED, before queued messages drain."""

    def on_reply(self, ctx: Context, reply: Reply) -> None:
        pass

    def on_timeout(self, ctx: Context, timeout: Timeout) -> None:
        pass


Factory = Callable[[Component], Behavior]


class BehaviorRegistry:
    def __init__(self, factories: dict[str, Factory] | None = None):
        self._factories: dict[str, Factory] = dict(factories or {})

    def register(self, name: str, factory: Factory | None = None):
        if factory is None:
            def decorator(fn):
                self._factories[name] = fn
                return fn
            return decorator
        self._factories[name] = factory
        return factory

    def __contains__(self, name: object) -> bool:
        return name in self._factories

    def __iter__(self) -> Iterator[str]:
        return iter(self._factories)

    def create(self, name: str, component: Component) -> Behavior:
        try:
            factory = self._factories[name]
        except KeyError:
            raise UnknownBehavior(f"unknown behavior {name!r}") from None
        return factory(component)

    def copy(self) -> "BehaviorRegistry":
        return BehaviorRegistry(self._factories)
