import re
from collections import defaultdict

_CRITERION = re.compile(r"test_acceptance\.py::test_criterion(\d+)_")
_outcomes: dict[int, list[tuple[str, str]]] = defaultdict(list)


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        outcome = "xfailed" if hasattr(report, "wasxfail") else report.outcome
        _outcomes[int(m.group(1))].append((report.nodeid.split("::", 1)[1], outcome))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_outcomes):
        results = _outcomes[n]
        bad = [name for name, outcome in results if outcome != "passed"]
        verdict = "FAIL" if bad else "PASS"
        detail = f"{len(results) - len(bad)}/{len(results)} tests passed"
        if bad:
            detail += "; not met: " + ", ".join(f"{name} ({dict(results)[name]})" for name in bad)
        tr.write_line(f"criterion {n}: {verdict}  ({detail})")
