import numpy as np
import pytest

_ACCEPTANCE = {}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def criterion(request):
    """Record the outcome of an acceptance criterion for the terminal summary."""

    def record(number, title):
        _ACCEPTANCE[request.node.nodeid] = (number, title)

    return record


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call" and item.nodeid in _ACCEPTANCE:
        number, title = _ACCEPTANCE[item.nodeid]
        _ACCEPTANCE[item.nodeid] = (number, title, rep.passed, rep.duration)


def pytest_terminal_summary(terminalreporter):
    rows = [v for v in _ACCEPTANCE.values() if len(v) == 4]
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, duration in sorted(rows):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {number:2d}: {title} ({duration:.2f}s)")


def random_symmetric_connectome(rng, n, scale=1.0):
    a = rng.uniform(-scale, scale, (n, n))
    a = np.triu(a, 1)
    a = a + a.T
    np.fill_diagonal(a, 1.0)
    return a


def random_graph(rng, n, density=1.0):
    w = random_symmetric_connectome(rng, n)
    mask = np.triu(rng.random((n, n)) < density, 1)
    mask = mask | mask.T
    w = np.where(mask, w, 0.0)
    np.fill_diagonal(w, 1.0)
    return w
