import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_kernel
from reflexkit.checks import checkpoint_before_reply, clock_violations, emission_violations
from reflexkit.errors import FaultPlanError, SchedulingError
from reflexkit.harness import (
    CrashFault,
    EventLog,
    EventRecord,
    FaultInjector,
    FaultPlan,
    Simulation,
    TransientFault,
    flip_lowest_bit,
)

CLIENT = "domain/pbr/client_machine"
P_SERVER = "domain/pbr/primary/server"


def pbr_run(requests=5, plan=None, until=None):
    kernel = make_kernel()
    FaultInjector(kernel, plan)
    for k in range(1, requests + 1):
        kernel.post(CLIENT, "submit", "increment", 5, at=100 * k)
    kernel.sim.run_until(until if until is not None else 100 * requests + 50)
    return kernel


# -- scheduler -----------------------------------------------------------------------

def test_equal_times_run_in_insertion_order():
    sim, seen = Simulation(), []
    sim.schedule(100, seen.append, "A")
    sim.schedule(100, seen.append, "B")
    sim.run_until()
    assert seen == ["A", "B"]


def test_event_at_now_runs_before_later_events():
    sim, seen = Simulation(), []
    sim.schedule(5, seen.append, "later")
    sim.schedule(0, seen.append, "now")
    sim.run_until()
    assert seen == ["now", "later"]


def test_scheduling_in_the_past_fails():
    sim = Simulation()
    sim.run_until(10)
    with pytest.raises(SchedulingError):
        sim.schedule(9, print)


def test_empty_queue_returns_immediately():
    sim = Simulation()
    assert sim.run_until() == []
    assert sim.now == 0
    sim.run_until(40)
    assert sim.now == 40


def test_cancelled_events_do_not_run():
    sim, seen = Simulation(), []
    handle = sim.schedule(3, seen.append, "x")
    handle.cancel()
    sim.run_until()
    assert seen == []


def test_stop_condition():
    sim, seen = Simulation(), []
    for t in range(10):
        sim.schedule(t, seen.append, t)
    sim.run_until(stop=lambda: len(seen) == 4)
    assert seen == [0, 1, 2, 3]
    assert sim.now == 3


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(min_value=0, max_value=50), max_size=40))
def test_dispatch_order_is_time_then_insertion(times):
    sim, seen = Simulation(), []
    for i, t in enumerate(times):
        sim.schedule(t, lambda t=t, i=i: (seen.append((t, i)), sim.log.append(sim.now, "warning", "x")))
    sim.run_until()
    assert seen == sorted(seen)
    assert clock_violations(sim.log) == []


# -- event log --------------------------------------------------------------------------

def test_log_round_trips_through_file(tmp_path):
    log = EventLog(seed=3)
    log.append(0, "lifecycle", "a", "from=STOPPED to=STARTED")
    log.append(4, "warning", "b\tc", "line\nbreak")
    log.write(tmp_path / "out.tsv")
    text = (tmp_path / "out.tsv").read_bytes().decode("utf-8")
    assert text.splitlines()[0] == "#reflexkit-log v1 seed=3"
    assert text.splitlines()[2] == "4\t1\twarning\tb c\tline break"
    back = EventLog.read(tmp_path / "out.tsv")
    assert back.seed == 3 and back.records == log.records


def test_log_rejects_bad_records():
    log = EventLog()
    with pytest.raises(ValueError):
        log.append(0, "gossip", "a")
    log.append(5, "warning", "a")
    with pytest.raises(ValueError):
        log.append(4, "warning", "a")


def test_record_fields():
    record = EventRecord.parse("7\t2\treply\tx\treq=A:1 value=5 to=y")
    assert record.fields() == {"req": "A:1", "value": "5", "to": "y"}


# -- scenarios over the harness --------------------------------------------------------------

def test_five_requests_without_faults():
    kernel = pbr_run(5)
    assert len(kernel.log.of_kind("reply")) == 5
    assert len(kernel.log.of_kind("checkpoint")) == 5
    assert checkpoint_before_reply(kernel.log) == []
    assert emission_violations(kernel.log) == []
    assert kernel.behavior(CLIENT).replies == [5, 10, 15, 20, 25]


def test_same_seed_and_plan_give_identical_logs():
    plan = FaultPlan([CrashFault("pbr/primary", 250)], [TransientFault(P_SERVER, 1)])
    a = pbr_run(5, plan, until=2000).log.to_text()
    b = pbr_run(5, plan, until=2000).log.to_text()
    assert a.encode() == b.encode()


def test_seed_is_recorded():
    assert make_kernel(seed=11).log.to_text().startswith("#reflexkit-log v1 seed=11\n")


def test_crashed_primary_swallows_later_invocations():
    plan = FaultPlan([CrashFault("pbr/primary", 50)])
    kernel = pbr_run(2, plan, until=1500)
    lost = [r for r in kernel.log.of_kind("dispatch")
            if r.subject.startswith("domain/pbr/primary/") and r.time > 50]
    assert lost and all(r.fields()["status"] == "lost" for r in lost)
    timeouts = [(r.time, r.detail) for r in kernel.log.of_kind("warning") if r.detail.startswith("timeout")]
    assert timeouts == [(600, "timeout req=A:1 deadline=600")]
    assert kernel.behavior(CLIENT).replies == []
    assert emission_violations(kernel.log) == []


def test_transient_on_third_reply():
    oracle = pbr_run(5).behavior(CLIENT).replies
    kernel = pbr_run(5, FaultPlan(transients=[TransientFault(P_SERVER, 3)]))
    observed = kernel.behavior(CLIENT).replies
    assert oracle[2] == 15 and observed[2] == 14 == flip_lowest_bit(oracle[2])
    assert observed[:2] == oracle[:2] and observed[3:] == oracle[3:]
    (fault,) = kernel.log.of_kind("fault")
    assert fault.detail == "transient nth=3 op=increment value=15 corrupted=14"


def test_transient_never_reached_changes_nothing():
    clean = pbr_run(5).log.to_text()
    assert pbr_run(5, FaultPlan(transients=[TransientFault(P_SERVER, 99)])).log.to_text() == clean


def test_only_integer_replies_are_counted():
    kernel = pbr_run(0)
    FaultInjector(kernel).inject_transient(TransientFault(P_SERVER, 1))
    kernel.post(CLIENT, "submit", "increment", 5)
    kernel.sim.run_until(kernel.sim.now)
    # get-state (bytes) follows increment; only the increment reply is corrupted
    assert kernel.behavior(CLIENT).replies == [4]
    assert kernel.behavior(P_SERVER).value == 5


def test_invalid_fault_plans():
    kernel = make_kernel()
    injector = FaultInjector(kernel)
    with pytest.raises(FaultPlanError):
        injector.inject_crash(CrashFault("pbr/nowhere", 10))
    with pytest.raises(FaultPlanError):
        injector.inject_transient(TransientFault("pbr/primary", 1))
    with pytest.raises(FaultPlanError):
        TransientFault(P_SERVER, 0)
    with pytest.raises(FaultPlanError):
        CrashFault(P_SERVER, -1)
