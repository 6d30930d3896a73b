"""Shared, session-cached gate channels (the open-system ones take ~0.5-1 min each)."""

import numpy as np
import pytest

from cavitybus.effective import gate_time, ideal_sqrt_swap
from cavitybus.model import ModelParams
from cavitybus.tomography import chi_tomography, reconstruct_channel, unitary_channel

# gamma / j and kappa / j from (g, gamma, kappa) ~ (2.5e9, 1.6e7, 4e5) Hz with j = g
EXPERIMENTAL = dict(gamma=1.6e7 / 2.5e9, kappa=4e5 / 2.5e9)


class ChannelCache:
    def __init__(self):
        self._store = {}

    def get(self, omega=0.03, kappa=0.0, gamma=0.0, n=5, tol=1e-8):
        key = (n, omega, kappa, gamma, tol)
        if key not in self._store:
            params = ModelParams.for_gate(n, omega, kappa=kappa, gamma=gamma)
            open_system = kappa > 0 or gamma > 0
            self._store[key] = reconstruct_channel(params, gate_time(params), open_system=open_system, tol=tol)
        return self._store[key]


@pytest.fixture(scope="session")
def channels():
    return ChannelCache()


@pytest.fixture(scope="session")
def ideal_chi():
    return chi_tomography(unitary_channel(ideal_sqrt_swap()))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_density(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if not test_acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(test_acceptance.RESULTS):
        terminalreporter.write_line(test_acceptance.RESULTS[number])
