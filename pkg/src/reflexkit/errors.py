"""Exception hierarchy shared by every reflexkit subsystem."""

from __future__ import annotations


class ReflexError(Exception):
    """Base class for all errors raised by reflexkit."""


class SourceError(ReflexError):
    """A diagnostic tied to a position in some source text."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


class ArchParseError(SourceError):
    pass


class ScriptSyntaxError(SourceError):
    pass


# -- architecture graph -------------------------------------------------------

class GraphError(ReflexError):
    pass


class UnresolvedPath(GraphError):
    pass


class DuplicateName(GraphError):
    pass


class InterfaceMismatch(GraphError):
    pass


class KindMismatch(GraphError):
    pass


class OccupiedReference(GraphError):
    pass


class NoSuchWire(GraphError):
    pass


class LifecycleError(GraphError):
    pass


class PropertyError(GraphError):
    pass


class UnknownBehavior(GraphError):
    pass


# -- invocation ---------------------------------------------------------------

class InvocationError(ReflexError):
    pass


class UnboundReference(InvocationError):
    pass


class InvocationTimeout(InvocationError):
    def __init__(self, message: str, deadline: int | None = None):
        super().__init__(message)
        self.deadline = deadline


class BehaviorFault(InvocationError):
    pass


class StaleRequest(BehaviorFault):
    pass


class PersistentMismatch(BehaviorFault):
    pass


# -- scripts ------------------------------------------------------------------

class ScriptError(ReflexError):
    pass


class ScriptRuntimeError(ScriptError):
    """Raised when a statement fails; carries the reconfiguration log so far."""

    def __init__(self, message: str, index: int | None = None, log=None):
        super().__init__(message)
        self.index = index
        self.log = log


class StepAfterDone(ScriptError):
    pass


# -- harness ------------------------------------------------------------------

class SchedulingError(ReflexError):
    pass


class FaultPlanError(ReflexError):
    pass
