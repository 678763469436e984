"""Collects one pass/fail line per acceptance criterion and prints them at the end of the run."""

import pytest

RESULTS: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def criterion():
    def record(label: str, passed: bool, detail: str) -> bool:
        RESULTS[label] = (bool(passed), detail)
        print(f"{'PASS' if passed else 'FAIL'} {label}: {detail}")
        return bool(passed)

    return record


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(RESULTS, key=lambda s: int(s.split()[0].lstrip("C"))):
        ok, detail = RESULTS[label]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}: {detail}")
