"""FScript-style reconfiguration language: parser, printer and interpreter."""

from reflexkit.scriptlang.ast import (
    AXES,
    PRIMITIVES,
    STATES,
    WILDCARD,
    Action,
    Assign,
    Call,
    PathExpr,
    Script,
    Step,
    StringLit,
    format_script,
)
from reflexkit.scriptlang.interpreter import (
    COMMIT,
    TRANSACTIONAL,
    ReconfigEntry,
    ReconfigLog,
    StepSession,
    eval_path,
    execute_statement,
    run_action,
)
from reflexkit.scriptlang.parser import parse_script

__all__ = [
    "AXES",
    "COMMIT",
    "PRIMITIVES",
    "STATES",
    "TRANSACTIONAL",
    "WILDCARD",
    "Action",
    "Assign",
    "Call",
    "PathExpr",
    "ReconfigEntry",
    "ReconfigLog",
    "Script",
    "Step",
    "StepSession",
    "StringLit",
    "eval_path",
    "execute_statement",
    "format_script",
    "parse_script",
    "run_action",
]
