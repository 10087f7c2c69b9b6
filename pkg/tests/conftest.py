import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_ACCEPTANCE_LINES: list[str] = []


def record_acceptance(number: int, passed: bool | str, detail: str) -> None:
    label = passed if isinstance(passed, str) else ("PASS" if passed else "FAIL")
    _ACCEPTANCE_LINES.append(f"acceptance {number}: {label} - {detail}")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(_ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
