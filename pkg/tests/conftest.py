"""Shared pytest plumbing: acceptance-criterion verdict lines.

Each acceptance test registers one line through record_verdict; the lines
are replayed in a terminal section after the run so every criterion shows a
single pass/fail summary even when its printed output was captured.
"""

_verdicts: list[str] = []


def record_verdict(name: str, ok: bool, detail: str) -> str:
    line = f"{name}: {'PASS' if ok else 'FAIL'} ({detail})"
    _verdicts.append(line)
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if _verdicts:
        terminalreporter.section("acceptance criteria")
        for line in _verdicts:
            terminalreporter.write_line(line)
