import numpy as np
import pytest

from cpb_cavity import HilbertSpace, figure_params


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def resonant():
    """C_jg = 5/2, zero detuning, one photon."""
    return figure_params(2.5, 0.0, 1)


@pytest.fixture
def detuned():
    return figure_params(2.5, 1.0, 1)


@pytest.fixture
def space1():
    return HilbertSpace.for_photons(1)


def random_density(rng, dim, rank=None):
    rank = rank or dim
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def haar_unitary(rng, dim=2):
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


ACCEPTANCE_LINES: dict[int, str] = {}


def record(number, passed, detail):
    """Store one acceptance verdict; printed in the terminal summary."""
    ACCEPTANCE_LINES[number] = f"ACC {number:>2} {'PASS' if passed else 'FAIL'}: {detail}"
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])
