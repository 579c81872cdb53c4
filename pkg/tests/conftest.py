import math

import pytest

from bellrevival.model import PhysicalParams

TWO_PI = 2.0 * math.pi


@pytest.fixture
def revival_params():
    """Discrete-bath revival parameters in omega0 = 1 units, qubits at d = lambda0/4."""
    return PhysicalParams(omega0=1.0, gamma=0.05, lam=0.066, J=-1e-3, d=0.5 * math.pi, v=1.0)


@pytest.fixture
def lifetime_params():
    """g = 0.05, lam = 0.001, J = -0.005 in omega0 = 1 units."""
    return PhysicalParams.from_g(1.0, 0.05, 0.001, J=-0.005, v=1.0)


@pytest.fixture
def lifetime_params_si():
    return PhysicalParams.from_g(TWO_PI * 5e9, 0.05 * TWO_PI * 5e9, 0.001 * TWO_PI * 5e9, J=-0.005 * TWO_PI * 5e9)


_ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def report(request):
    """Record one acceptance line: report(number, passed, detail)."""
    lines = request.config.stash.setdefault(_ACCEPTANCE_KEY, [])

    def add(number, passed, detail):
        line = f"criterion {number:>3}: {'PASS' if passed else 'FAIL'}  {detail}"
        lines.append(line)
        print(line)

    return add


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: (int(s.split()[1].rstrip(":").rstrip("abc")), s.split()[1])):
            terminalreporter.write_line(line)
