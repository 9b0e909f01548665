import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_ACCEPTANCE: dict = {}


def report(k: int, ok: bool, detail: str) -> None:
    """Record and print one acceptance line."""
    line = f"ACCEPTANCE {k} {'PASS' if ok else 'FAIL'}: {detail}"
    _ACCEPTANCE[k] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[k])
