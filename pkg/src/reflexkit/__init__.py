"""Deterministic component runtime with a reconfiguration language and
fault-tolerance mechanisms that can be swapped while the system runs."""

__version__ = "0.1.0"
