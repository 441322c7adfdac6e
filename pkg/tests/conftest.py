import pytest

from apronid import kernels

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): exit criterion")


@pytest.fixture(params=kernels.available_backends())
def backend(request):
    return request.param


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, title = marker.args
    key = (number, title)
    failed = report.failed
    if report.when == "call" or failed:
        _ACCEPTANCE[key] = _ACCEPTANCE.get(key, True) and not failed


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for (number, title), ok in sorted(_ACCEPTANCE.items()):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {number}. {title}")
