import warnings

import pytest

from underbarrier.potential import BarrierParams

#: one line per acceptance criterion, filled by test_acceptance.py
ACCEPTANCE: dict[int, str] = {}


def _params(a):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return BarrierParams.from_alpha0_sq(30.0, 0.2, 0.03, a)


@pytest.fixture(scope="session")
def p_wide():
    """Profile wider than the critical width (three real branches)."""
    return _params(2.0)


@pytest.fixture(scope="session")
def p_narrow():
    """Profile narrower than the critical width (hybrid branches)."""
    return _params(1.6)


@pytest.fixture(scope="session")
def p_near():
    """Inside the near-critical window."""
    return _params(1.75)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
