import numpy as np
import pytest

from csnmr.qcore import outer_product, preset_state

# Lines appended by the acceptance suite and echoed in the terminal summary.
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def rho2():
    return outer_product(preset_state("psi2"))


@pytest.fixture
def rho3():
    return outer_product(preset_state("psi3"))


@pytest.fixture
def rho4():
    return outer_product(preset_state("psi4"))


def random_hermitian(d, rng):
    m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (m + m.conj().T) / 2


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
