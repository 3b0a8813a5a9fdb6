import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_kernel
from scriptgen import scripts
from reflexkit.errors import ScriptRuntimeError, ScriptSyntaxError, StepAfterDone
from reflexkit.kernel import Lifecycle
from reflexkit.resources import shipped_text
from reflexkit.scriptlang import (
    COMMIT,
    Call,
    PathExpr,
    Step,
    StepSession,
    eval_path,
    format_script,
    parse_script,
    run_action,
)

CLIENT = "domain/pbr/client_machine"
BACKUP_SVC = "domain/pbr/backup.computeService"
PRIMARY_SVC = "domain/pbr/primary.computeService"


def path(text):
    """Parse a single path expression through a throwaway action."""
    action = parse_script(f"action t(root, c){{ v = {text}; }}").actions[0]
    return action.body[0].expr


# -- parsing -------------------------------------------------------------------------

def test_switch_server_shape(switch_script):
    assert switch_script.names() == ["switchServer"]
    action = switch_script.action("switchServer")
    assert action.params == ()
    assert len(action.body) == 11
    assert (action.assignments, action.calls) == (7, 4)
    assert [s.primitive for s in action.body if isinstance(s, Call)] == [
        "set-state", "remove-scawire", "add-scawire", "set-state"]


def test_empty_action():
    script = parse_script("action noop(){ }")
    assert script.names() == ["noop"]
    assert script.actions[0].body == ()


def test_unassigned_variable_is_rejected():
    with pytest.raises(ScriptSyntaxError, match=r"\$y") as info:
        parse_script("action bad(){ x = $y/scachild::a; }")
    assert (info.value.line, info.value.column) == (1, 19)


@pytest.mark.parametrize("text,fragment", [
    ("action a(){ x = $domain/scakid::pbr; }", "unknown axis"),
    ("action a(){ start($domain); }", "unknown primitive"),
    ('action a(){ set-state($domain); }', "takes 2 arguments"),
    ('action a(){ set-state($domain, "RUNNING"); }', "STARTED"),
    ('action a(){ set-state("STOPPED", $domain); }', "path argument"),
    ("action a(){ set-state($domain, $domain); }", "quoted string"),
    ("action a(){ add-scawire($domain, \"x\"); }", "path argument"),
    ("action a(){ } action a(){ }", "duplicate action"),
    ("action a(p, p){ }", "duplicate parameter"),
    ("action a(){ x = $domain }", "expected ';'"),
    ("action a(){ x = $domain; ", "end of input"),
    ("action a(){ x = $domain/scachild::pbr; @ }", "unexpected character"),
])
def test_syntax_errors(text, fragment):
    with pytest.raises(ScriptSyntaxError, match=fragment):
        parse_script(text)


def test_error_position_on_later_line():
    with pytest.raises(ScriptSyntaxError) as info:
        parse_script("action a(){\n  x = $domain;\n  y = $x/sca::b;\n}")
    assert (info.value.line, info.value.column) == (3, 10)


def test_comments_and_parameters():
    script = parse_script("-- header\naction go(target){ -- inline\n set-state($target, \"STOPPED\"); }")
    assert script.actions[0].params == ("target",)
    assert len(script.actions[0].body) == 1


def test_positions_do_not_affect_equality():
    a = parse_script("action a(){ x = $domain; }")
    b = parse_script("\n\naction a(){\n\n  x = $domain;\n}")
    assert a == b


# -- path evaluation ---------------------------------------------------------------------

def test_eval_domain_child(kernel):
    (node,) = eval_path(path("$domain/scachild::pbr"), {}, kernel.graph)
    assert node.path == "domain/pbr"


def test_eval_no_match(kernel):
    root = eval_path(path("$domain/scachild::pbr"), {}, kernel.graph)
    assert eval_path(path("$root/scachild::nonexistent"), {"root": root}, kernel.graph) == ()


def test_eval_reference_matches_direct_lookup(kernel):
    c = (kernel.graph.node(CLIENT),)
    (ref,) = eval_path(path("$c/scareference::computeService"), {"c": c}, kernel.graph)
    assert ref is kernel.graph.port(kernel.graph.endpoint(f"{CLIENT}.computeService", "reference"))


def test_incompatible_axis_is_empty(kernel):
    c = (kernel.graph.node(CLIENT),)
    ref = eval_path(path("$c/scareference::computeService"), {"c": c}, kernel.graph)
    assert eval_path(PathExpr("r", (Step("scaservice", "x"),)), {"r": ref}, kernel.graph) == ()
    assert eval_path(path("$c/scachild::x"), {"c": c}, kernel.graph) == ()


def test_wildcard_document_order_and_dedup(kernel):
    root = eval_path(path("$domain/scachild::pbr"), {}, kernel.graph)
    kids = eval_path(path("$root/scachild::*"), {"root": root + root}, kernel.graph)
    assert [n.name for n in kids] == ["client_machine", "primary", "backup", "failure_detector"]
    props = eval_path(path("$root/scachild::*/scaproperty::*"), {"root": root}, kernel.graph)
    assert [p.name for p in props] == ["client_id", "deadline", "heartbeat_period", "missed_threshold"]


def test_eval_is_pure(kernel):
    expr = path("$domain/scachild::pbr/scachild::*/scaservice::*")
    before = kernel.graph.dump()
    assert eval_path(expr, {}, kernel.graph) == eval_path(expr, {}, kernel.graph)
    assert kernel.graph.dump() == before


# -- running -------------------------------------------------------------------------------

def test_switch_server_final_graph(kernel, switch_script):
    log = run_action(kernel, switch_script, "switchServer")
    assert len(log) == 11
    assert [e.primitive for e in log.side_effects()] == [
        "set-state", "remove-scawire", "add-scawire", "set-state"]
    assert kernel.graph.wires[kernel.graph.endpoint(f"{CLIENT}.computeService", "reference")] \
        == kernel.graph.endpoint(BACKUP_SVC, "service")
    assert kernel.graph.component(CLIENT).lifecycle is Lifecycle.STARTED
    assert kernel.validate() == []


def test_switch_server_twice_is_rolled_back(kernel, switch_script):
    run_action(kernel, switch_script, "switchServer")
    after_first = kernel.snapshot()
    with pytest.raises(ScriptRuntimeError) as info:
        run_action(kernel, switch_script, "switchServer")
    assert info.value.index == 8
    assert info.value.log[-1].failed
    assert kernel.snapshot() == after_first


def test_commit_mode_keeps_earlier_effects(kernel, switch_script):
    run_action(kernel, switch_script, "switchServer")
    with pytest.raises(ScriptRuntimeError):
        run_action(kernel, switch_script, "switchServer", mode=COMMIT)
    assert kernel.graph.component(CLIENT).lifecycle is Lifecycle.STOPPED


def test_noop_action(kernel):
    before = kernel.graph.dump()
    assert run_action(kernel, parse_script("action noop(){ }"), "noop") == []
    assert kernel.graph.dump() == before


def test_argument_sets_must_be_singletons(kernel):
    script = parse_script('action a(){ x = $domain/scachild::pbr/scachild::*; set-state($x, "STOPPED"); }')
    with pytest.raises(ScriptRuntimeError, match="single node, got 4"):
        run_action(kernel, script, "a")
    empty = parse_script('action a(){ set-state($domain/scachild::nope, "STOPPED"); }')
    with pytest.raises(ScriptRuntimeError, match="got 0"):
        run_action(kernel, empty, "a")


def test_primitive_preconditions(kernel):
    on_composite = parse_script('action a(){ set-state($domain/scachild::pbr, "STOPPED"); }')
    with pytest.raises(ScriptRuntimeError, match="needs a component"):
        run_action(kernel, on_composite, "a")
    swapped = parse_script(
        "action a(){ c = $domain/scachild::pbr/scachild::client_machine;"
        " add-scawire($c, $c/scareference::computeService); }")
    with pytest.raises(ScriptRuntimeError, match="expects a reference"):
        run_action(kernel, swapped, "a")


def test_unknown_action_and_arity(kernel, switch_script):
    with pytest.raises(ScriptRuntimeError, match="unknown action"):
        run_action(kernel, switch_script, "rollback")
    with pytest.raises(ScriptRuntimeError, match="takes 0 argument"):
        run_action(kernel, switch_script, "switchServer", args=("pbr",))


def test_parameters_bind_to_nodes(kernel):
    script = parse_script('action halt(target){ set-state($target, "STOPPED"); }')
    run_action(kernel, script, "halt", args=("pbr/client_machine",))
    assert kernel.graph.component(CLIENT).lifecycle is Lifecycle.STOPPED


# -- stepping -------------------------------------------------------------------------------

def test_step_session_switch_server(kernel, switch_script):
    session = StepSession(kernel, switch_script, "switchServer")
    entries = []
    for i in range(11):
        if i == 9:
            info = kernel.introspect(CLIENT)
            assert info.lifecycle == "STOPPED"
            assert info.reference("computeService").target is None
        entries.append(session.step())
    assert all(e is not None and not e.failed for e in entries)
    assert entries[8].arguments == (f"reference:{CLIENT}.computeService", f"service:{PRIMARY_SVC}")
    assert session.step() is None
    assert session.done
    with pytest.raises(StepAfterDone):
        session.step()


def test_step_noop_is_immediately_done(kernel):
    session = StepSession(kernel, parse_script("action noop(){ }"), "noop")
    assert session.step() is None
    with pytest.raises(StepAfterDone):
        session.step()


def test_step_failure_ends_session(kernel, switch_script):
    run_action(kernel, switch_script, "switchServer")
    session = StepSession(kernel, switch_script, "switchServer")
    for _ in range(8):
        session.step()
    with pytest.raises(ScriptRuntimeError):
        session.step()
    assert session.done


def test_step_equals_run_commit(switch_script):
    stepped, ran = make_kernel(), make_kernel()
    session = StepSession(stepped, switch_script, "switchServer")
    while session.step() is not None:
        pass
    run_action(ran, switch_script, "switchServer", mode=COMMIT)
    assert stepped.graph.dump() == ran.graph.dump()


# -- properties -------------------------------------------------------------------------------

@settings(max_examples=200, deadline=None)
@given(scripts)
def test_print_parse_round_trip(script):
    assert parse_script(format_script(script)) == script


def test_fig2_round_trip(switch_script):
    assert parse_script(format_script(switch_script)) == switch_script


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=23), st.sampled_from(["before", "during"]))
def test_transactional_atomicity(index, where):
    kernel = make_kernel("pbr_tr.arch")
    script = parse_script(shipped_text("insertTimeRedundancy.rcfg"))
    before = kernel.snapshot()

    def hook(i, stmt):
        if i == index and where == "before":
            raise RuntimeError("forced failure")

    if where == "during":
        # break the kernel under the statement instead of before it
        original = kernel.add_wire
        calls = iter(range(100))

        def flaky(ref, svc, note=""):
            if next(calls) == index % 4:
                raise RuntimeError("forced failure")
            return original(ref, svc, note)

        kernel.add_wire = flaky
    with pytest.raises(ScriptRuntimeError):
        run_action(kernel, script, "insertTimeRedundancy", on_statement=hook)
    assert kernel.snapshot() == before
