import pytest

from susychain import BacklundChain, SeedSpec
from susychain.analysis import TwoWellParams

ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_log():
    def record(number, ok, message):
        ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {message}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":").rstrip("abc"))):
            terminalreporter.write_line(line)


@pytest.fixture
def two_well():
    return TwoWellParams(kappa1=1.0, kappa2=0.5, a=5.0, b=5.0)


@pytest.fixture
def regular_chains():
    """Nodeless S/R chains of order 1, 2, 3 (every partial Wronskian regular)."""
    return {
        1: BacklundChain([SeedSpec("R", 1.0, 0.0)]),
        2: BacklundChain([SeedSpec("S", 1.0, 0.0), SeedSpec("R", 0.5, 0.0)]),
        3: BacklundChain([SeedSpec("R", 0.5, 1.0), SeedSpec("S", 1.0, 0.0), SeedSpec("R", 1.5, -0.5)]),
    }
