from __future__ import annotations

import pytest

from thetapencil.elliptic import build_pencil


@pytest.fixture(scope="session")
def pencil22():
    return build_pencil(2, 2, 1, 1j, seed=7)


@pytest.fixture(scope="session")
def pencil23():
    return build_pencil(2, 3, 1, 1j, seed=7)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in RESULTS:
        terminalreporter.write_line(line)
