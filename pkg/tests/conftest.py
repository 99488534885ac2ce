import pytest

from qkcompose import _backend

_criteria = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num, title): acceptance criterion")


@pytest.fixture(params=_backend.available())
def backend(request):
    return request.param


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    crit = dict(report.user_properties).get("criterion")
    if crit is None:
        return
    detail = dict(report.user_properties).get("detail", "")
    _criteria.append((crit, report.passed, detail))


@pytest.fixture
def criterion(request, record_property):
    """Tag a test with its acceptance-criterion label and attach detail text."""
    marker = request.node.get_closest_marker("criterion")
    record_property("criterion", f"{marker.args[0]:>2}. {marker.args[1]}")

    def detail(text):
        record_property("detail", text)
    return detail


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for crit, passed, detail in sorted(_criteria, key=lambda c: int(c[0].split(".")[0])):
        line = f"[{'PASS' if passed else 'FAIL'}] {crit}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)
