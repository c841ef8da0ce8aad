import pytest

from nonholo.scenarios import SCENARIOS, build

SCENARIO_IDS = tuple(SCENARIOS)

# (criterion number, title, passed, detail), filled by test_acceptance
ACCEPTANCE_LINES = []


@pytest.fixture(params=SCENARIO_IDS)
def scenario(request):
    return build(request.param)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(ACCEPTANCE_LINES):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number:>2} {status}  {title}: {detail}")
