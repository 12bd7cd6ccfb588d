import numpy as np
import pytest

from heqcm import helium_hamiltonian, helium_noise


@pytest.fixture(scope="session")
def h():
    return helium_hamiltonian()


@pytest.fixture(scope="session")
def noise():
    return helium_noise()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_symmetric(rng, dim):
    a = rng.normal(size=(dim, dim))
    return (a + a.T) / 2


def random_hermitian(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (a + a.conj().T) / 2
