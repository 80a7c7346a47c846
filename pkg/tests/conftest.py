import pytest

# (criterion number, title, passed, detail) appended by tests/test_acceptance.py
ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num, title, ok, detail in sorted(ACCEPTANCE_RESULTS, key=lambda r: r[0]):
        mark = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"[{mark}] {num:2d}. {title}: {detail}")


@pytest.fixture
def record_acceptance():
    def record(num, title, ok, detail):
        ACCEPTANCE_RESULTS.append((num, title, bool(ok), detail))
        print(f"[{'PASS' if ok else 'FAIL'}] {num:2d}. {title}: {detail}")
        return ok
    return record
