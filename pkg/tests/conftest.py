import pytest

# filled by test_acceptance.py: criterion id -> (passed, detail)
ACCEPTANCE_RESULTS: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def record_criterion():
    def record(cid: str, passed: bool, detail: str) -> None:
        ACCEPTANCE_RESULTS[cid] = (passed, detail)
        print(f"[{'PASS' if passed else 'FAIL'}] {cid}: {detail}")
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE_RESULTS, key=lambda c: int(c.split()[0][1:])):
        passed, detail = ACCEPTANCE_RESULTS[cid]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {cid}: {detail}")
