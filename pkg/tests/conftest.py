import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ssimopt import get_backend, set_backend

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(params=["numba", "numpy"])
def backend(request):
    old = get_backend()
    set_backend(request.param)
    yield request.param
    set_backend(old)


# acceptance criteria report: tests record (number, passed, detail) here
CRITERIA = {}


@pytest.fixture
def criterion(request):
    """Record the outcome of an acceptance criterion for the summary."""
    num = request.node.get_closest_marker("criterion").args[0]
    details = []
    yield details
    rep = getattr(request.node, "rep_call", None)
    CRITERIA[num] = (rep is not None and rep.passed, "; ".join(details))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(CRITERIA):
        ok, detail = CRITERIA[num]
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}")
