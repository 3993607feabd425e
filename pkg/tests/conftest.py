import re

_CRITERION = re.compile(r"test_acceptance\.py::test_c(\d+)_")
_results = {}


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    n = int(m.group(1))
    if report.when == "call" or report.failed:
        detail = dict(report.user_properties).get("detail", "")
        # a criterion split across several tests passes only if all of them do
        prev_ok, prev_detail = _results.get(n, (True, ""))
        _results[n] = (prev_ok and report.passed, "; ".join(filter(None, [prev_detail, detail])))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_results):
        ok, detail = _results[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
