"""Canned end-to-end scenarios: failover by script and runtime insertion of time redundancy."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from reflexkit.checks import checkpoint_before_reply, clock_violations, emission_violations
from reflexkit.errors import ReflexError
from reflexkit.ftm import default_registry
from reflexkit.harness import CrashFault, EventLog, FaultInjector, Simulation, TransientFault
from reflexkit.harness.faults import flip_lowest_bit
from reflexkit.kernel import Kernel, build_graph
from reflexkit.resources import read_source
from reflexkit.scriptlang import parse_script, run_action

SCENARIOS = ("pbr-failover", "duplex-plus-tr")

CLIENT = "domain/pbr/client_machine"
DETECTOR = "domain/pbr/failure_detector"
PRIMARY = "domain/pbr/primary"
PRIMARY_SERVER = "domain/pbr/primary/server"
PRIMARY_TR = "domain/pbr/primary/tr"
BACKUP_SERVER = "domain/pbr/backup/server"


@dataclass
class ScenarioSpec:
    name: str
    requests: int = 10
    crash_at: int | None = None
    # logical request numbers (1-based) whose server execution is corrupted once
    transients: tuple[int, ...] = ()
    # logical requests corrupted in every time-redundancy round
    persistent: tuple[int, ...] = ()
    interval: int = 100
    amount: int = 5
    seed: int = 0
    arch: str | None = None
    scripts: tuple[str, ...] = ()

    def __post_init__(self):
        if self.name not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.name!r}; choose from {', '.join(SCENARIOS)}")
        if self.requests < 0:
            raise ValueError("request count must be non-negative")
        if self.arch is None:
            self.arch = "pbr.arch" if self.name == "pbr-failover" else "pbr_tr.arch"
        if not self.scripts:
            self.scripts = (
                ("switchServer.rcfg",) if self.name == "pbr-failover" else ("insertTimeRedundancy.rcfg",)
            )
        for path in (self.arch, *self.scripts):
            read_source(path)


def expected_replies(requests: int, amount: int) -> list[int]:
    """Sequential replay of the counter: the fault-free reply stream."""
    return list(itertools.accumulate([amount] * requests))


def _client_done(kernel: Kernel, requests: int) -> bool:
    return len(kernel.behavior(CLIENT).observed) >= requests


def _submit_all(kernel: Kernel, spec: ScenarioSpec) -> None:
    for k in range(1, spec.requests + 1):
        kernel.post(CLIENT, "submit", "increment", spec.amount, at=k * spec.interval)


# -- pbr-failover ----------------------------------------------------------------

@dataclass
class FailoverResult:
    spec: ScenarioSpec
    log: EventLog
    replies: list
    failures: list[str] = field(default_factory=list)
    suspected_at: int | None = None
    switched_at: int | None = None
    acked_at_switch: int | None = None
    backup_at_switch: int | None = None
    backup_final: int | None = None
    server_executions: int | None = None

    @property
    def ok(self) -> bool:
        return not self.failures


def run_pbr_failover(spec: ScenarioSpec) -> FailoverResult:
    registry = default_registry()
    sim = Simulation(spec.seed)
    kernel = Kernel(build_graph(read_source(spec.arch), registry), sim, registry)
    script = parse_script(read_source(spec.scripts[0]))
    kernel.start_all()
    _submit_all(kernel, spec)
    if spec.crash_at is not None:
        FaultInjector(kernel).inject_crash(CrashFault(PRIMARY, spec.crash_at))

    result = FailoverResult(spec, sim.log, [])

    def switch() -> None:
        acked = sum(1 for r in sim.log.of_kind("reply") if "value" in r.fields())
        try:
            run_action(kernel, script, script.actions[0].name)
        except ReflexError as exc:
            result.failures.append(f"failover script failed: {exc}")
            return
        result.switched_at = sim.now
        result.acked_at_switch = acked
        result.backup_at_switch = kernel.behavior(BACKUP_SERVER).value

    def on_record(record) -> None:
        if record.kind == "suspicion" and result.suspected_at is None:
            result.suspected_at = record.time
            sim.schedule(sim.now, switch, label="operator runs failover script")

    sim.log.subscribe(on_record)
    detector = kernel.graph.component(DETECTOR)
    period = detector.properties["heartbeat_period"].value
    threshold = detector.properties["missed_threshold"].value
    deadline = kernel.get_property(CLIENT, "deadline")
    horizon = (
        max(spec.requests * spec.interval, spec.crash_at or 0)
        + (threshold + 2) * period + 2 * deadline + spec.interval
    )

    def finished() -> bool:
        return _client_done(kernel, spec.requests) and (
            spec.crash_at is None or result.switched_at is not None or bool(result.failures)
        )

    sim.run_until(horizon, stop=finished)

    client = kernel.behavior(CLIENT)
    result.replies = [o.value if o.error is None else o.error for o in client.observed]
    result.backup_final = kernel.behavior(BACKUP_SERVER).value
    # backups only restore snapshots, so increments anywhere are real executions
    result.server_executions = (
        kernel.behavior(PRIMARY_SERVER).executions + kernel.behavior(BACKUP_SERVER).executions
    )

    expected = expected_replies(spec.requests, spec.amount)
    if result.replies != expected:
        result.failures.append(f"client replies {result.replies} != expected {expected}")
    if spec.crash_at is not None:
        if result.suspected_at is None:
            result.failures.append("primary crash was never suspected")
        else:
            bound = spec.crash_at + threshold * period + period
            if not spec.crash_at < result.suspected_at <= bound:
                result.failures.append(
                    f"suspicion at {result.suspected_at} outside ({spec.crash_at}, {bound}]"
                )
        if result.switched_at is not None:
            want = spec.amount * result.acked_at_switch
            if result.backup_at_switch != want:
                result.failures.append(
                    f"backup state {result.backup_at_switch} at failover != {want} "
                    f"({result.acked_at_switch} acknowledged requests)"
                )
            final = expected[-1] if expected else 0
            if result.backup_final != final:
                result.failures.append(f"backup final state {result.backup_final} != {final}")
    for problem in checkpoint_before_reply(sim.log) + emission_violations(sim.log) + clock_violations(sim.log):
        result.failures.append(problem)
    return result


# -- duplex-plus-tr ------------------------------------------------------------

@dataclass
class PhaseResult:
    label: str
    log: EventLog
    replies: list
    errors: list[str]
    mismatches: int


@dataclass
class TrResult:
    spec: ScenarioSpec
    oracle: list
    phase1: PhaseResult
    phase2: PhaseResult
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def corrupted(self, phase: PhaseResult) -> list[int]:
        return [
            k for k, (want, got) in enumerate(zip(self.oracle, phase.replies), 1) if want != got
        ]

    def write_log(self, path) -> None:
        lines = [self.phase1.log.header(), "#phase 1 without time redundancy"]
        lines += [r.line() for r in self.phase1.log]
        lines.append("#phase 2 with time redundancy inserted at runtime")
        lines += [r.line() for r in self.phase2.log]
        with open(path, "wb") as fh:
            fh.write("".join(line + "\n" for line in lines).encode("utf-8"))


def transient_indices(spec: ScenarioSpec, with_tr: bool, max_retries: int) -> list[int]:
    """Map logical requests in the plan onto the server's integer-reply indices.

    Without time redundancy request k is the server's k-th integer reply. With
    it every request costs two executions per round: two rounds for a single
    transient, ``max_retries + 1`` rounds when every round is corrupted.
    """
    if not with_tr:
        return sorted(set(spec.transients) | set(spec.persistent))
    out, index = [], 1
    for k in range(1, spec.requests + 1):
        if k in spec.persistent:
            rounds = max_retries + 1
            out.extend(index + 2 * r for r in range(rounds))
            index += 2 * rounds
        elif k in spec.transients:
            out.append(index)
            index += 4
        else:
            index += 2
    return out


def _tr_phase(spec: ScenarioSpec, with_tr: bool, label: str, plan: bool = True) -> PhaseResult:
    registry = default_registry()
    sim = Simulation(spec.seed)
    kernel = Kernel(build_graph(read_source(spec.arch), registry), sim, registry)
    kernel.start_all()
    injector = FaultInjector(kernel)
    max_retries = kernel.get_property(PRIMARY_TR, "max_retries")
    if plan:
        for nth in transient_indices(spec, with_tr, max_retries):
            injector.inject_transient(TransientFault(PRIMARY_SERVER, nth))
    if with_tr:
        script = parse_script(read_source(spec.scripts[0]))
        sim.schedule(spec.interval // 2, run_action, kernel, script, script.actions[0].name,
                     label="insert time redundancy")
    _submit_all(kernel, spec)
    horizon = (spec.requests + 1) * spec.interval + 2 * kernel.get_property(CLIENT, "deadline")
    sim.run_until(horizon, stop=lambda: _client_done(kernel, spec.requests))
    client = kernel.behavior(CLIENT)
    replies = [o.value if o.error is None else None for o in client.observed]
    errors = [o.error for o in client.observed if o.error is not None]
    mismatches = len([r for r in sim.log.of_kind("warning") if r.detail.startswith("tr-mismatch")])
    return PhaseResult(label, sim.log, replies, errors, mismatches)


def run_duplex_plus_tr(spec: ScenarioSpec) -> TrResult:
    oracle = _tr_phase(spec, with_tr=False, label="fault-free", plan=False).replies
    phase1 = _tr_phase(spec, with_tr=False, label="phase 1")
    phase2 = _tr_phase(spec, with_tr=True, label="phase 2")
    result = TrResult(spec, oracle, phase1, phase2)

    if oracle != expected_replies(spec.requests, spec.amount):
        result.failures.append(f"fault-free replay {oracle} disagrees with counter semantics")
    planned = sorted(k for k in set(spec.transients) | set(spec.persistent) if 1 <= k <= spec.requests)
    if result.corrupted(phase1) != planned:
        result.failures.append(
            f"phase 1 corrupted requests {result.corrupted(phase1)}, expected {planned}"
        )
    for k in result.corrupted(phase1):
        if phase1.replies[k - 1] != flip_lowest_bit(oracle[k - 1]):
            result.failures.append(f"phase 1 request {k}: {phase1.replies[k - 1]} is not a bit flip")
    for error in phase2.errors:
        result.failures.append(f"phase 2 fault: {error}")
    if phase2.replies != oracle:
        diff = [
            f"request {k}: expected {want} observed {got}"
            for k, (want, got) in enumerate(itertools.zip_longest(oracle, phase2.replies), 1)
            if want != got
        ]
        result.failures.append("phase 2 replies differ from fault-free replay: " + "; ".join(diff))
    return result
