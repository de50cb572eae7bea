"""Collects the outcome of every test marked ``criterion(n, title)`` and prints
one PASS/FAIL line per acceptance criterion at the end of the run."""

import pytest

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        n, title = marker.args
        entry = _RESULTS.setdefault(n, {"title": title, "ok": True, "notes": []})
        passed = report.outcome == "passed" and not hasattr(report, "wasxfail")
        entry["ok"] = entry["ok"] and passed
        detail = getattr(item, "acceptance_detail", None)
        if detail:
            entry["notes"].append(detail)
        if hasattr(report, "wasxfail"):
            entry["notes"].append(f"known failure: {report.wasxfail}")


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        entry = _RESULTS[n]
        verdict = "PASS" if entry["ok"] else "FAIL"
        line = f"ACCEPTANCE criterion {n}: {verdict}  {entry['title']}"
        if entry["notes"]:
            line += "  [" + "; ".join(entry["notes"]) + "]"
        terminalreporter.write_line(line)


@pytest.fixture
def detail(request):
    """Call with a short string to attach it to the criterion's summary line."""

    def record(text):
        request.node.acceptance_detail = text

    return record
