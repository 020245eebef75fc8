import numpy as np
import pytest

from sepeig.linalg import BipartiteOperator, DensityOperator, Dims
from sepeig.solver import SolverConfig
from sepeig.states import bell_phi


def rand_herm(d_a, d_b, rng):
    n = d_a * d_b
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return BipartiteOperator(Dims(d_a, d_b), (z + z.conj().T) / 2)


def rand_unit(d, rng):
    z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return z / np.linalg.norm(z)


def rand_unitary(d, rng):
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


@pytest.fixture
def rng():
    return np.random.default_rng(20080509)


@pytest.fixture
def fast_cfg():
    return SolverConfig(starts=16, seed=7)


@pytest.fixture
def bell_proj():
    return bell_phi().projector()


@pytest.fixture
def bell_rho():
    return bell_phi().density()


@pytest.fixture
def product_rho():
    v = np.zeros(4)
    v[0] = 1
    return DensityOperator(BipartiteOperator.projector(v, 2, 2))
