import numpy as np
import pytest

from spinwell.dynamics import GalerkinState, GalerkinSystem
from spinwell.energy import AnisotropyPotential
from spinwell.noise import make_noise_family
from spinwell.spectral import build_bases

# lines collected by the acceptance tests, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def small_bases():
    # non-cubic box and unequal mode counts catch axis mix-ups
    return build_bases((4.0, 3.0, 2.5), (4, 3, 2), (3, 2, 2))


@pytest.fixture(scope="session")
def small_system(small_bases):
    tilted = np.array([0.3, -0.2, 1.0])
    phi = AnisotropyPotential(tuple(tilted / np.linalg.norm(tilted)), 0.7, 10.0)
    noise = make_noise_family(small_bases.h, J=4, amplitude=0.3)
    return GalerkinSystem(small_bases, phi, noise, lambda1=0.8, lambda2=0.6)


def make_state(bases, rng, scale=0.1):
    """Random state near a unit constant magnetization (|M| stays well below 3)."""
    hb = bases.h
    m = scale * rng.standard_normal(hb.shape) / (1.0 + hb.eigenvalues)
    d = rng.standard_normal(3)
    m[:, 0, 0, 0] += np.sqrt(hb.volume) * d / np.linalg.norm(d)
    b = scale * rng.standard_normal(bases.y.shape)
    e = scale * rng.standard_normal(bases.y.shape)
    return GalerkinState(m, b, e, 0.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
