import pytest

from ofdmim_relay import ReliabilityTarget, SystemParams

# Profile used throughout the numerical results: eta1=1.3, eta2=1.1, mu1=1.3,
# mu2=1.5, 100 dBW power ceilings.
S_5DB = 10 ** 0.5

_acceptance_lines = []


def record_criterion(number, name, passed, detail=""):
    _acceptance_lines.append(f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {name} {detail}".rstrip())


@pytest.fixture
def params():
    return SystemParams()


@pytest.fixture
def target():
    return ReliabilityTarget(S_5DB, 1e-3)


@pytest.fixture
def report():
    return record_criterion


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
