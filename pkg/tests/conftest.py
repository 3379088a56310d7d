import pytest

# criterion number -> (title, outcome, seconds, note)
_CRITERIA: dict[int, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call":
        if marker is not None and report.when == "setup" and report.failed:
            _CRITERIA[marker.args[0]] = [marker.args[1], "FAIL", 0.0, "setup error"]
        return
    number, title = marker.args
    note = getattr(item, "criterion_note", "")
    _CRITERIA[number] = [title, "PASS" if report.passed else "FAIL", report.duration, note]


@pytest.fixture
def note(request):
    """Attach a short measurement to the criterion's summary line."""

    def record(text: str) -> None:
        request.node.criterion_note = text

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, status, seconds, extra = _CRITERIA[number]
        line = f"criterion {number:2d} {status}  {title}  ({seconds:.2f} s)"
        if extra:
            line += f"  [{extra}]"
        terminalreporter.write_line(line)
