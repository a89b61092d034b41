import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

# filled by test_acceptance.py: criterion number -> "PASS" / "FAIL"
CRITERIA = {}


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(CRITERIA):
        terminalreporter.write_line(f"criterion {k}: {CRITERIA[k]}")
