import sys


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    mod = (sys.modules.get("test_acceptance")
           or sys.modules.get("tests.test_acceptance"))
    if mod is None or not getattr(mod, "REPORT_LINES", None):
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for line in sorted(mod.REPORT_LINES):
        terminalreporter.write_line(line)
