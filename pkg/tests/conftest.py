import pytest

from reflexkit.ftm import default_registry
from reflexkit.harness import Simulation
from reflexkit.kernel import Kernel, build_graph
from reflexkit.resources import shipped_text
from reflexkit.scriptlang import parse_script

CRITERIA = {
    "ac1": "switchServer script fidelity",
    "ac2": "failover safety over the crash grid",
    "ac3": "detection bound",
    "ac4": "time-redundancy masking",
    "ac5": "quiescence and no-loss",
    "ac6": "determinism",
    "ac7": "transactionality",
    "ac8": "round-trips",
}
_outcomes: dict[str, bool] = {}


def make_kernel(arch="pbr.arch", seed=0, start=True, text=None):
    registry = default_registry()
    text = shipped_text(arch) if text is None else text
    kernel = Kernel(build_graph(text, registry), Simulation(seed), registry)
    if start:
        kernel.start_all()
    return kernel


@pytest.fixture
def kernel():
    return make_kernel()


@pytest.fixture
def switch_script():
    return parse_script(shipped_text("switchServer.rcfg"))


def pytest_runtest_logreport(report):
    if "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    key = name.removeprefix("test_").split("_")[0]
    if key not in CRITERIA:
        return
    if report.when == "call" or report.outcome != "passed":
        _outcomes[key] = _outcomes.get(key, True) and report.outcome == "passed"


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for key, title in CRITERIA.items():
        if key in _outcomes:
            status = "PASS" if _outcomes[key] else "FAIL"
            terminalreporter.write_line(f"{key.upper()} {status}  {title}")
