"""Random, well-formed reconfiguration scripts for round-trip tests."""

import random

from hypothesis import strategies as st

from reflexkit.scriptlang import AXES, STATES, Action, Assign, Call, PathExpr, Script, Step, StringLit

NAMES = ["pbr", "client_machine", "primary", "backup", "c-ref", "s1-serv", "server", "x_1", "a-b-c"]
VARS = ["root", "c", "s1", "s2", "c-ref", "s1-serv", "s2-serv", "v", "tmp_2"]


def random_script(rng: random.Random) -> Script:
    actions = []
    for i in range(rng.randint(1, 3)):
        params = tuple(rng.sample(VARS, rng.randint(0, 2)))
        bound = ["domain", *params]
        body = []
        for _ in range(rng.randint(0, 12)):
            if rng.random() < 0.5:
                var = rng.choice(VARS)
                body.append(Assign(var, _path(rng, bound)))
                bound.append(var)
            else:
                body.append(_call(rng, bound))
        actions.append(Action(f"act{i}-{rng.choice(NAMES)}", params, tuple(body)))
    return Script(tuple(actions))


def _path(rng: random.Random, bound: list[str]) -> PathExpr:
    steps = tuple(
        Step(rng.choice(AXES), "*" if rng.random() < 0.1 else rng.choice(NAMES))
        for _ in range(rng.randint(0, 3))
    )
    return PathExpr(rng.choice(bound), steps)


def _call(rng: random.Random, bound: list[str]) -> Call:
    kind = rng.choice(["set-state", "add-scawire", "remove-scawire"])
    if kind == "set-state":
        return Call(kind, (_path(rng, bound), StringLit(rng.choice(STATES))))
    return Call(kind, (_path(rng, bound), _path(rng, bound)))


def corpus(n: int = 50, seed: int = 7) -> list[Script]:
    rng = random.Random(seed)
    return [random_script(rng) for _ in range(n)]


scripts = st.randoms(use_true_random=False).map(random_script)
