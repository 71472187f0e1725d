import sys

import pytest

from confdim.igs import bundled_spec


@pytest.fixture(scope="session")
def diamond():
    return bundled_spec("diamond")


@pytest.fixture(scope="session")
def fig5_left():
    return bundled_spec("fig5_left")


@pytest.fixture(scope="session")
def fig5_right():
    return bundled_spec("fig5_right")


@pytest.fixture(scope="session")
def two_branch():
    return bundled_spec("two_branch")


@pytest.fixture(scope="session")
def all_specs(diamond, fig5_left, fig5_right, two_branch):
    return {"diamond": diamond, "fig5_left": fig5_left, "fig5_right": fig5_right,
            "two_branch": two_branch}


def pytest_terminal_summary(terminalreporter):
    lines = []
    for name in ("test_acceptance", "tests.test_acceptance"):
        lines += getattr(sys.modules.get(name), "VERDICTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
