"""Tests for the dense linear-algebra primitives"""
import sys
import math
from pathlib import Path

import numpy as np
import pytest

# Add the parent directory to sys.path
sys.path.insert(0, str(Path(__file__).parent.parent))

from modules.exceptions import DimensionMismatch, NonHermitian
from modules.linops import (
    DensityOperator,
    MatrixPayload,
    hermitize,
    kron,
    log2,
    matrix_power,
    min_entropy,
    partial_trace,
    permutation_matrix,
    permute_subsystems,
    purified_distance,
    random_density,
    random_unitary,
    root_fidelity,
    support_projection,
    trace_norm,
    von_neumann_entropy,
)
from tests.config import EXACT_TOL
from tests.utils import assert_close, assert_matrix_close, bell_state, eigen_entropy, pure


def test_hermitize_rejects_asymmetry():
    """A clearly non-Hermitian matrix is rejected, rounding noise is symmetrized"""
    with pytest.raises(NonHermitian):
        hermitize(np.array([[0, 1], [0, 0]], dtype=complex))
    noisy = np.array([[1, 1e-13], [0, 1]], dtype=complex)
    out = hermitize(noisy)
    assert_matrix_close(out, out.conj().T, 0.0, "symmetrized matrix")


def test_log2_edge_values():
    """log2 maps 0 to −∞ and ∞ to ∞"""
    assert log2(0.0) == -math.inf, "log2(0) should be -inf"
    assert log2(math.inf) == math.inf, "log2(inf) should be inf"
    assert log2(8.0) == 3.0, "log2(8) should be 3"


def test_matrix_power_pseudo_inverse():
    """Negative powers act on the support only"""
    p = pure(1, 0)
    assert_matrix_close(matrix_power(p, -0.5), p, EXACT_TOL, "p^(-1/2)")
    assert_matrix_close(support_projection(np.diag([0.5, 0.0])), p, EXACT_TOL, "support projection")


def test_partial_trace_of_bell_state():
    """Both marginals of a Bell state are maximally mixed"""
    rho = bell_state()
    for keep in ([0], [1]):
        assert_matrix_close(partial_trace(rho, [2, 2], keep), np.eye(2) / 2, EXACT_TOL, f"marginal {keep}")


def test_partial_trace_product(rng):
    """tr_B(ρ ⊗ σ) = ρ for a three-by-two product"""
    a, b = random_density(3, rng), random_density(2, rng)
    assert_matrix_close(partial_trace(kron(a, b), [3, 2], [0]), a, EXACT_TOL, "first factor")
    assert_matrix_close(partial_trace(kron(a, b), [3, 2], [1]), b, EXACT_TOL, "second factor")


def test_partial_trace_dimension_check():
    """Mismatched dims are rejected"""
    with pytest.raises(DimensionMismatch):
        partial_trace(np.eye(4), [3, 2], [0])


def test_permute_subsystems_swaps_factors(rng):
    """Swapping two factors of a product reverses the product"""
    a, b = random_density(2, rng), random_density(3, rng)
    swapped = permute_subsystems(kron(a, b), [2, 3], [1, 0])
    assert_matrix_close(swapped, kron(b, a), EXACT_TOL, "swapped product")


def test_permutation_matrix_is_swap():
    """The two-qubit permutation matrix is SWAP"""
    swap = permutation_matrix([2, 2], [1, 0])
    expected = np.eye(4)[[0, 2, 1, 3]]
    assert_matrix_close(swap, expected, EXACT_TOL, "SWAP")


def test_trace_norm_and_fidelity(rng):
    """‖ρ‖₁ = 1 for states and F(ρ, ρ) = 1"""
    rho = random_density(3, rng)
    assert_close(trace_norm(rho), 1.0, EXACT_TOL, "trace norm")
    assert_close(root_fidelity(rho, rho), 1.0, 1e-7, "self fidelity")
    assert_close(purified_distance(rho, rho), 0.0, 1e-3, "self distance")


def test_fidelity_orthogonal_states():
    """Orthogonal pure states have zero fidelity and unit purified distance"""
    assert_close(root_fidelity(pure(1, 0), pure(0, 1)), 0.0, EXACT_TOL, "fidelity")
    assert_close(purified_distance(pure(1, 0), pure(0, 1)), 1.0, EXACT_TOL, "purified distance")


def test_generalized_fidelity_of_substates():
    """Substates pick up the √((1 − tr ρ)(1 − tr σ)) correction"""
    half = np.diag([0.5, 0.0]).astype(complex)
    assert_close(root_fidelity(half, half), 1.0, EXACT_TOL, "generalized fidelity")


def test_entropies(rng):
    """Von Neumann and min-entropy against eigenvalues"""
    rho = random_density(4, rng)
    evals = np.linalg.eigvalsh(rho)
    assert_close(von_neumann_entropy(rho), eigen_entropy(evals), 1e-10, "H(ρ)")
    assert_close(min_entropy(rho), -math.log2(evals[-1]), 1e-10, "H_min(ρ)")
    assert_close(von_neumann_entropy(bell_state()), 0.0, EXACT_TOL, "pure state entropy")


def test_random_unitary_is_unitary(rng):
    """Haar sampler returns unitaries"""
    u = random_unitary(5, rng)
    assert_matrix_close(u @ u.conj().T, np.eye(5), 1e-12, "U U*")


def test_density_operator_validation():
    """DensityOperator rejects negative or unnormalized matrices"""
    with pytest.raises(ValueError):
        DensityOperator(matrix=np.diag([1.2, -0.2]))
    with pytest.raises(ValueError):
        DensityOperator(matrix=np.diag([0.5, 0.2]))
    sub = DensityOperator(matrix=np.diag([0.5, 0.2]), substate_allowed=True)
    assert abs(sub.trace - 0.7) < 1e-12, f"substate trace {sub.trace}"


def test_density_payload_round_trip(rng):
    """The JSON payload restores the matrix"""
    rho = DensityOperator(matrix=random_density(3, rng))
    restored = DensityOperator.from_payload(rho.to_payload())
    assert_matrix_close(restored.matrix, rho.matrix, 0.0, "restored state")


def test_matrix_payload_rejects_bad_count():
    """Entry count has to match rows × cols"""
    with pytest.raises(ValueError):
        MatrixPayload(rows=2, cols=2, data=[[1.0, 0.0]])
