from __future__ import annotations

import pytest

from sievecert import buchstab

ACCEPTANCE_LINES: list[str] = []

EPS1_VALUES = (0.0, 1e-7)


@pytest.fixture(scope="session")
def omega_table():
    return buchstab.build_omega()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
