import numpy as np
import pytest

from cheblcu.instances import random_sparse_hermitian, random_state

_ACCEPTANCE: dict[int, tuple[str, str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion test")


@pytest.fixture
def rng():
    return np.random.default_rng(20240613)


@pytest.fixture
def instance(rng):
    def make(N=4, d=2, **kwargs):
        return random_sparse_hermitian(rng, N, d, **kwargs), random_state(rng, N)

    return make


@pytest.fixture
def measured(request):
    """Attach a one-line measurement summary to the current acceptance test."""

    def record(text):
        request.node.user_properties.append(("measured", text))

    return record


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or report.when != "call" and not report.failed:
        return
    number, title = marker.args
    detail = "; ".join(v for k, v in item.user_properties if k == "measured")
    status = "PASS" if report.passed else "FAIL"
    if report.when == "call" or number not in _ACCEPTANCE:
        _ACCEPTANCE[number] = (status, title, detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        status, title, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"[{status}] criterion {number:2d}: {title} | {detail}")
