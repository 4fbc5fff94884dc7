"""pytest configuration and fixtures"""
import numpy as np
import pytest

from modules.algebra import make_diagonal, make_full, make_tensor_factor, make_trivial
from modules.linops import random_density
from modules.solver import SolverOptions
from cli.presets import swap_invariant
from tests.config import TEST_SEED
from tests.utils import pure


@pytest.fixture
def rng():
    """Fresh seeded generator for every test"""
    return np.random.default_rng(TEST_SEED)


@pytest.fixture(scope="session")
def opts():
    """Solver options shared by the suite"""
    return SolverOptions(tol=1e-8, seed=TEST_SEED, multi_start=2)


@pytest.fixture(scope="session")
def diag2():
    return make_diagonal(2)


@pytest.fixture(scope="session")
def diag3():
    return make_diagonal(3)


@pytest.fixture(scope="session")
def trivial2():
    return make_trivial(2)


@pytest.fixture(scope="session")
def full2():
    return make_full(2)


@pytest.fixture(scope="session")
def factor23():
    """M_2 ⊗ 1_3, index 1/6"""
    return make_tensor_factor(2, 3, keep_first=True)


@pytest.fixture(scope="session")
def swap_algebra():
    return swap_invariant()


@pytest.fixture(scope="session")
def plus_state():
    return pure(1, 1)


@pytest.fixture(scope="session")
def mixed_qubit():
    """Full-rank qubit state with real coherence"""
    return np.array([[0.7, 0.2], [0.2, 0.3]], dtype=complex)


@pytest.fixture(scope="session")
def random_qubits():
    """Seeded full-rank qubit states"""
    generator = np.random.default_rng(TEST_SEED + 1)
    return [random_density(2, generator) for _ in range(4)]
