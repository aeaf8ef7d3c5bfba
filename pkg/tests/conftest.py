import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Print one PASS/FAIL line per acceptance criterion after the run."""
    try:
        from test_acceptance import CRITERIA_LOG
    except ImportError:
        return
    if not CRITERIA_LOG:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for num, ok, detail in sorted(CRITERIA_LOG):
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"[criterion {num}] {status} - {detail}")
