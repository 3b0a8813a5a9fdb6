"""Command-line entry point.

    reflexkit validate --arch pbr.arch
    reflexkit run --arch pbr.arch --script switchServer.rcfg --log out.tsv
    reflexkit step --arch pbr.arch --script switchServer.rcfg --action switchServer
    reflexkit scenario pbr-failover --requests 10 --crash-at 450 --log out.tsv

Shipped files can be named without a directory. Exit status: 0 on success,
1 when a scenario assertion or script fails, 2 on usage or parse errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from reflexkit.errors import ReflexError, SourceError
from reflexkit.ftm import default_registry
from reflexkit.harness import Simulation
from reflexkit.kernel import Kernel, build_graph
from reflexkit.resources import read_source
from reflexkit.scenarios import SCENARIOS, ScenarioSpec, run_duplex_plus_tr, run_pbr_failover
from reflexkit.scriptlang import StepSession, parse_script, run_action

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2
SEED_ENV = "REFLEXKIT_SEED"


class UsageError(Exception):
    pass


def _seed() -> int:
    raw = os.environ.get(SEED_ENV, "0")
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _read(path: str) -> str:
    try:
        return read_source(path)
    except OSError as exc:
        raise UsageError(str(exc)) from None


def _parse_arch(path: str):
    registry = default_registry()
    try:
        return build_graph(_read(path), registry), registry
    except SourceError as exc:
        raise UsageError(f"{path}:{exc.line}:{exc.column}: {exc.message}") from None


def _parse_script(path: str):
    try:
        return parse_script(_read(path))
    except SourceError as exc:
        raise UsageError(f"{path}:{exc.line}:{exc.column}: {exc.message}") from None


def _load(args) -> Kernel:
    graph, registry = _parse_arch(args.arch)
    kernel = Kernel(graph, Simulation(_seed()), registry)
    kernel.start_all()
    return kernel


def _dump(kernel: Kernel, target: str | None) -> None:
    if not target:
        return
    text = kernel.graph.dump()
    if target == "-":
        sys.stdout.write(text)
    else:
        Path(target).write_text(text, encoding="utf-8")


def cmd_validate(args) -> int:
    graph, _ = _parse_arch(args.arch)
    problems = graph.validate()
    for problem in problems:
        print(f"invalid: {problem}", file=sys.stderr)
    components, wires = graph.counts()
    print(f"{args.arch}: {components} components, {wires} wires")
    return EXIT_FAILED if problems else EXIT_OK


def cmd_run(args) -> int:
    kernel = _load(args)
    scripts = [(path, _parse_script(path)) for path in args.script]
    for k in range(1, args.requests + 1):
        kernel.post("pbr/client_machine", "submit", "increment", 5, at=k * 100)
    status = EXIT_OK
    for path, script in scripts:
        for action in script.actions:
            try:
                log = run_action(kernel, script, action.name)
            except ReflexError as exc:
                print(f"{path}: {exc}", file=sys.stderr)
                status = EXIT_FAILED
                break
            print(f"{path}: {action.name}: {len(log)} statements, {len(log.side_effects())} edits")
        if status:
            break
    kernel.sim.run_until(args.until)
    kernel.sim.log.write(args.log)
    _dump(kernel, args.dump_graph)
    return status


def cmd_step(args) -> int:
    kernel = _load(args)
    script = _parse_script(args.script)
    try:
        session = StepSession(kernel, script, args.action)
    except ReflexError as exc:
        raise UsageError(str(exc)) from None
    interactive = not args.batch
    while not session.done:
        stmt = session.next_statement()
        if stmt is not None:
            prompt = f"[{session.index + 1}/{session.total}] {stmt}"
            print(prompt, flush=True)
            while interactive:
                line = sys.stdin.readline()
                if not line:
                    interactive = False
                    break
                command = line.strip()
                if command in ("q", "quit"):
                    print("aborted")
                    _dump(kernel, args.dump_graph)
                    return EXIT_FAILED
                if command.startswith("i "):
                    try:
                        print(f"  {kernel.introspect(command[2:].strip())}")
                    except ReflexError as exc:
                        print(f"  {exc}")
                    continue
                break
        try:
            entry = session.step()
        except ReflexError as exc:
            print(f"  error: {exc}")
            _dump(kernel, args.dump_graph)
            return EXIT_FAILED
        if entry is None:
            print("done")
        else:
            print(f"  {entry.primitive} {' '.join(entry.arguments)} -> {entry.outcome}")
    _dump(kernel, args.dump_graph)
    return EXIT_OK


def cmd_scenario(args) -> int:
    try:
        spec = ScenarioSpec(
            args.name, requests=args.requests, crash_at=args.crash_at,
            transients=tuple(args.transient), persistent=tuple(args.persistent), seed=_seed(),
        )
    except (ValueError, OSError) as exc:
        raise UsageError(str(exc)) from None
    if spec.name == "pbr-failover":
        result = run_pbr_failover(spec)
        result.log.write(args.log)
        print(f"replies: {result.replies}")
        if spec.crash_at is not None:
            print(f"crash at {spec.crash_at}, suspected at {result.suspected_at}, "
                  f"failover at {result.switched_at}")
    else:
        result = run_duplex_plus_tr(spec)
        result.write_log(args.log)
        print(f"expected: {result.oracle}")
        print(f"phase 1:  {result.phase1.replies}")
        print(f"phase 2:  {result.phase2.replies}")
    for failure in result.failures:
        print(f"FAIL: {failure}", file=sys.stderr)
    return EXIT_OK if result.ok else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="reflexkit", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse an architecture and sweep its invariants")
    p.add_argument("--arch", required=True)
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("run", help="start an architecture, run scripts, simulate")
    p.add_argument("--arch", required=True)
    p.add_argument("--script", action="append", default=[])
    p.add_argument("--until", type=int, default=1000)
    p.add_argument("--requests", type=int, default=0,
                   help="client requests to submit, one every 100 time units")
    p.add_argument("--log", required=True)
    p.add_argument("--dump-graph", metavar="PATH", help="write the canonical graph ('-' for stdout)")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("step", help="execute an action one statement at a time")
    p.add_argument("--arch", required=True)
    p.add_argument("--script", required=True)
    p.add_argument("--action", required=True)
    p.add_argument("--batch", action="store_true", help="do not wait for input between statements")
    p.add_argument("--dump-graph", metavar="PATH")
    p.set_defaults(fn=cmd_step)

    p = sub.add_parser("scenario", help="run a canned scenario and check its outcome")
    p.add_argument("name", choices=SCENARIOS)
    p.add_argument("--requests", type=int, default=10)
    p.add_argument("--crash-at", type=int)
    p.add_argument("--transient", type=int, action="append", default=[], metavar="K",
                   help="corrupt the server reply for logical request K once")
    p.add_argument("--persistent", type=int, action="append", default=[], metavar="K",
                   help="corrupt request K in every time-redundancy round")
    p.add_argument("--log", required=True)
    p.set_defaults(fn=cmd_scenario)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"reflexkit: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
