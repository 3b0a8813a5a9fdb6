"""Fault-tolerance behaviors and the registry that names them in ``.arch`` files."""

from reflexkit.ftm.counter import Counter, decode_state, encode_state
from reflexkit.ftm.descriptor import (
    PBR,
    TIME_REDUNDANCY,
    AppContext,
    FtmDescriptor,
    Verdict,
    check_applicability,
)
from reflexkit.ftm.detector import HeartbeatDetector
from reflexkit.ftm.pbr import BACKUP, PRIMARY, Checkpoint, Observed, ReplicationProtocol, RequestClient
from reflexkit.ftm.redundancy import TimeRedundancy
from reflexkit.kernel.behavior import BehaviorRegistry


def default_registry() -> BehaviorRegistry:
    return BehaviorRegistry({
        "pbr-client": RequestClient,
        "pbr-primary": lambda c: ReplicationProtocol(c, PRIMARY),
        "pbr-backup": lambda c: ReplicationProtocol(c, BACKUP),
        "counter": Counter,
        "heartbeat-detector": HeartbeatDetector,
        "time-redundancy": TimeRedundancy,
    })


__all__ = [
    "BACKUP",
    "PBR",
    "PRIMARY",
    "TIME_REDUNDANCY",
    "AppContext",
    "Checkpoint",
    "Counter",
    "FtmDescriptor",
    "HeartbeatDetector",
    "Observed",
    "ReplicationProtocol",
    "RequestClient",
    "TimeRedundancy",
    "Verdict",
    "check_applicability",
    "decode_state",
    "default_registry",
    "encode_state",
]
