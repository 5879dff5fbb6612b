import pytest

# filled by test_acceptance; one entry per criterion with its detailed checks
ACCEPTANCE = {}


def record(criterion, checks):
    ACCEPTANCE.setdefault(criterion, []).extend(checks)


@pytest.fixture
def acceptance_record():
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for criterion in sorted(ACCEPTANCE):
        checks = ACCEPTANCE[criterion]
        for c in checks:
            tr.write_line("    " + c.line())
        status = "PASS" if all(c.passed for c in checks) else "FAIL"
        tr.write_line(f"criterion {criterion}: {status}")
