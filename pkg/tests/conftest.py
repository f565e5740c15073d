import pytest

# (criterion, label, passed, detail) rows collected by the acceptance suite
ACCEPTANCE: list[tuple[str, str, bool, str]] = []


@pytest.fixture
def report():
    def _report(criterion: str, label: str, passed: bool, detail: str) -> bool:
        ACCEPTANCE.append((criterion, label, bool(passed), detail))
        print(f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {label} ({detail})")
        return bool(passed)

    return _report


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for criterion, label, passed, detail in sorted(ACCEPTANCE, key=lambda r: r[0]):
        tr.write_line(f"{'PASS' if passed else 'FAIL'}  {criterion:<4} {label}: {detail}")
