"""Prints one PASS/FAIL line per acceptance criterion after the run."""

_acceptance_outcomes: list[tuple[str, str]] = []


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call":
        _acceptance_outcomes.append((name, report.outcome))
    elif report.when == "setup" and report.skipped:
        _acceptance_outcomes.append((name, "skipped"))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance_outcomes:
        label = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}.get(outcome, outcome.upper())
        terminalreporter.write_line(f"{label:>4}  {name}")
