import warnings

import pytest

from spikelab.ground_state import integrals, solve_ground_state
from spikelab.reduced import RegimeWarning


@pytest.fixture(scope="session")
def profile():
    return solve_ground_state()


@pytest.fixture(scope="session")
def constants(profile):
    return integrals(profile)


@pytest.fixture(autouse=True)
def _quiet_regime():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegimeWarning)
        yield


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "LINES", None)
    if not lines:
        return
    terminalreporter.section("acceptance")
    terminalreporter.write_line("id  status  criterion                  detail")
    for cid in sorted(lines):
        terminalreporter.write_line(lines[cid])
