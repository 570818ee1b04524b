import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion, when that module ran."""
    mod = sys.modules.get("test_acceptance")
    if mod is None:
        return
    terminalreporter.section("acceptance criteria")
    for k, title in mod.TITLES.items():
        if k in mod.VERDICTS:
            ok, detail = mod.VERDICTS[k]
            terminalreporter.write_line(f"criterion {k:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}")
        else:
            terminalreporter.write_line(f"criterion {k:2d} NOT RUN  {title}")
