"""Prints one pass/fail line per acceptance criterion at the end of the run."""

_results: list[tuple[str, str, str]] = []


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        doc = report.user_properties and dict(report.user_properties).get("criterion", "")
        _results.append((report.nodeid.split("::")[-1], report.outcome.upper(), doc or ""))


def pytest_runtest_makereport(item, call):
    fn = getattr(item, "function", None)
    if fn is not None and fn.__doc__ and ("criterion", fn.__doc__.strip()) not in item.user_properties:
        item.user_properties.append(("criterion", fn.__doc__.strip()))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome, doc in _results:
        status = "PASS" if outcome == "PASSED" else "FAIL"
        terminalreporter.write_line(f"{status}  {name}: {doc}")
