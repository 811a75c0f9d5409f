import pytest

from wearsim.config import build, load_scenario
from wearsim.engine import simulate


@pytest.fixture(scope="session")
def world():
    return build({})


@pytest.fixture(scope="session")
def pm(world):
    return world.power


def run_world(w, **kw):
    return simulate(w.scenario, w.power.profiles, w.power.modes, w.curve, w.battery, w.uplink, **kw)


@pytest.fixture(scope="session")
def bundled():
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = load_scenario(name)
        return cache[name]

    return get


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line: call with (ok, detail)."""

    def report(ok: bool, detail: str):
        line = f"[{'PASS' if ok else 'FAIL'}] {request.node.name}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
