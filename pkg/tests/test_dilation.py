"""Tests for Stinespring dilations and purifications"""
import sys
from pathlib import Path

import numpy as np
import pytest

# Add the parent directory to sys.path
sys.path.insert(0, str(Path(__file__).parent.parent))

from modules.algebra import conditional_expectation
from modules.dilation import (
    StinespringIsometry,
    build_xi,
    dilate_state,
    kraus_operators,
    multiplicative_domain_check,
    order_inequality_check,
    purify,
    range_projection,
    stinespring,
)
from modules.exceptions import DimensionMismatch
from modules.linops import kron, partial_trace, random_density
from tests.config import EXACT_TOL
from tests.utils import assert_matrix_close


def test_kraus_count_and_completeness(factor23, swap_algebra):
    """Σ m_k² Kraus operators with Σ K*K = 1"""
    for N in (factor23, swap_algebra):
        kraus = kraus_operators(N)
        assert len(kraus) == N.env_dim, f"{len(kraus)} Kraus operators, expected {N.env_dim}"
        total = sum(k.conj().T @ k for k in kraus)
        assert_matrix_close(total, np.eye(N.ambient_dim), EXACT_TOL, "Σ K*K")


def test_stinespring_reproduces_expectation(swap_algebra, rng):
    """tr_E(VxV*) = E_N(x) = V*(x ⊗ 1_E)V"""
    N = swap_algebra
    V = stinespring(N)
    x = random_density(N.ambient_dim, rng)
    lifted = V.matrix @ x @ V.matrix.conj().T
    expected = conditional_expectation(N, x)
    assert_matrix_close(partial_trace(lifted, [V.dim_in, V.dim_env], [0]), expected, EXACT_TOL, "tr_E(VxV*)")
    adjoint = V.matrix.conj().T @ kron(x, np.eye(V.dim_env)) @ V.matrix
    assert_matrix_close(adjoint, expected, EXACT_TOL, "V*(x ⊗ 1)V")


def test_isometry_validation():
    """A non-isometric matrix is rejected"""
    with pytest.raises(ValueError):
        StinespringIsometry(dim_in=2, dim_env=1, matrix=2 * np.eye(2))


def test_range_projection(diag2):
    """VV* is a projection of rank d"""
    e = range_projection(stinespring(diag2))
    assert e.rank == 2, f"range projection rank {e.rank}"


def test_dilated_state_marginal(diag2, mixed_qubit):
    """The A marginal of VρV* in (E, A) order is the dephased state"""
    V = stinespring(diag2)
    omega = dilate_state(V, mixed_qubit)
    assert omega.shape == (4, 4), f"dilated shape {omega.shape}"
    assert_matrix_close(partial_trace(omega, [2, 2], [1]), np.diag([0.7, 0.3]), EXACT_TOL, "ω_A")
    with pytest.raises(DimensionMismatch):
        dilate_state(V, np.eye(3) / 3)


def test_purification_marginal(rng):
    """tr_F |ψ⟩⟨ψ| = ρ, with d_F the rank"""
    rho = random_density(3, rng, rank=2)
    psi, d_f = purify(rho)
    assert d_f == 2, f"purifying dimension {d_f}"
    assert_matrix_close(partial_trace(np.outer(psi, psi.conj()), [3, d_f], [0]), rho, 1e-10, "ψ_A")


def test_xi_marginals(factor23, rng):
    """ξ_EA is the dilated state and ξ_F has the spectrum of ρ"""
    rho = random_density(6, rng)
    V = stinespring(factor23)
    xi = build_xi(V, rho)
    assert xi.dims == (V.dim_env, 6, 6), f"ξ dims {xi.dims}"
    assert_matrix_close(xi.marginal([0, 1]), dilate_state(V, rho), 1e-10, "ξ_EA")
    spectrum = np.sort(np.linalg.eigvalsh(xi.marginal([2])))
    assert np.allclose(spectrum, np.sort(np.linalg.eigvalsh(rho)), atol=1e-10), "ξ_F spectrum differs"


def test_multiplicative_domain(swap_algebra, diag2):
    """Commutation with VV* holds exactly for operators in N"""
    for N in (swap_algebra, diag2):
        report = multiplicative_domain_check(N, stinespring(N), samples=20, seed=5)
        assert report.consistent, f"multiplicative domain mismatch on {N.blocks}"
        assert report.samples[0].in_algebra, "identity should lie in N"


def test_order_inequality(factor23):
    """E(x) ⊗ 1_E ⪰ V E(x) V* for PSD x"""
    report = order_inequality_check(factor23, stinespring(factor23), samples=10, seed=5)
    assert report.passed, f"smallest eigenvalue {min(report.min_eigenvalues):.3e}"
