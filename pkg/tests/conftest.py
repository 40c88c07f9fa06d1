import numpy as np
import pytest

from dgch.mesh import build_rect_mesh
from dgch.space import DgSpace

_ACCEPTANCE = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): exit criterion of the build")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is not None and rep.when == "call":
        number, title = marker.args
        _ACCEPTANCE.append((number, title, rep.outcome, getattr(item, "acceptance_detail", "")))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, outcome, detail in sorted(_ACCEPTANCE):
        status = "PASS" if outcome == "passed" else "FAIL"
        line = f"[{status}] {number}. {title}"
        if detail:
            line += f" -- {detail}"
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(params=[1, 2, 3], ids=lambda q: f"q{q}")
def q(request):
    return request.param


@pytest.fixture
def neumann_space(q):
    return DgSpace(build_rect_mesh((0.0, 1.0, 0.0, 1.0), 3, 2, "neumann"), q)


@pytest.fixture
def periodic_space(q):
    return DgSpace(build_rect_mesh((0.0, 2 * np.pi, 0.0, 2 * np.pi), 3, 3, "periodic"), q)
