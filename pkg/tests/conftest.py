import re

import pytest

_CRITERIA = {}
_PATTERN = re.compile(r"test_criterion_(\d+)_")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    m = _PATTERN.search(item.name)
    if m is None or report.when not in ("setup", "call"):
        return
    number = int(m.group(1))
    if report.when == "setup" and report.passed:
        return
    status = "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")
    detail = ""
    if report.failed and report.longrepr is not None:
        detail = str(getattr(report.longrepr, "reprcrash", None) and report.longrepr.reprcrash.message or "")
        detail = detail.splitlines()[0][:160] if detail else ""
    _CRITERIA[number] = (status, item.name, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        status, name, detail = _CRITERIA[number]
        line = f"criterion {number:2d}: {status}  {name}"
        if detail:
            line += f"  -- {detail}"
        terminalreporter.write_line(line)
