import re
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_CRITERION = re.compile(r"test_criterion_(\d+)_(\w+)")
_results = {}


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    key = (int(m.group(1)), m.group(2).replace("_", " "))
    failed = report.failed or (report.when == "call" and report.skipped)
    if failed:
        _results[key] = "FAIL"
    elif report.when == "call":
        _results.setdefault(key, "PASS")


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for (num, name), verdict in sorted(_results.items()):
        terminalreporter.write_line(f"criterion {num} {verdict}: {name}")
