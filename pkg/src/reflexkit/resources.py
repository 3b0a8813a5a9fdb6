"""Access to the shipped architecture files and scripts."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

SHIPPED = ("pbr.arch", "pbr_tr.arch", "switchServer.rcfg", "insertTimeRedundancy.rcfg")


def shipped_path(name: str):
    return resources.files("reflexkit") / "data" / name


def shipped_text(name: str) -> str:
    return shipped_path(name).read_text(encoding="utf-8")


def read_source(path: str | Path) -> str:
    """Read a user file, falling back to a shipped file of the same name."""
    p = Path(path)
    if p.exists():
        return p.read_text(encoding="utf-8")
    if p.name in SHIPPED and str(p) == p.name:
        return shipped_text(p.name)
    raise FileNotFoundError(f"cannot read {path}")
