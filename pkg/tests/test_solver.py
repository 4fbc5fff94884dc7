"""Tests for the certified divergence solvers"""
import sys
import math
from pathlib import Path

import numpy as np
import pytest

# Add the parent directory to sys.path
sys.path.insert(0, str(Path(__file__).parent.parent))

from modules.algebra import conditional_expectation, make_trivial, state_grid
from modules.exceptions import DimensionMismatch, InvalidEpsilon
from modules.linops import purified_distance, random_density, von_neumann_entropy
from modules.solver import (
    SolverOptions,
    dh_subalgebra,
    dmax_pair,
    dmax_subalgebra,
    dmin_subalgebra,
    fidelity_divergence,
    neyman_pearson,
    relative_entropy,
    renyi_pair,
    renyi_subalgebra,
    smooth_dmax_pair,
    smooth_dmax_subalgebra,
    smooth_dmin_subalgebra,
    supported,
    verify,
)
from tests.config import (
    CLASSICAL_ALPHA2_BITS,
    EPS_VALUES,
    EXACT_TOL,
    PLUS_DIAGONAL_BITS,
    SMALL_EPS,
    SOLVER_TOL,
    TEST_SEED,
)
from tests.utils import assert_close, pure

# Certificates are re-verified against this tolerance
VERIFY_OPTS = SolverOptions(tol=1e-6, seed=TEST_SEED, multi_start=2)


def qubit_dmin(coherence: float) -> float:
    """D_min of a qubit against the diagonal algebra"""
    return -math.log2((1 + math.sqrt(1 - 4 * coherence ** 2)) / 2)


# ---------------------------------------------------------------------------
# Fixed-pair divergences
# ---------------------------------------------------------------------------

def test_pair_closed_forms():
    """|0⟩ against 1/2: D = D_max = 1 and D_{1/2} = 1"""
    zero, half = pure(1, 0), np.eye(2) / 2
    assert_close(relative_entropy(zero, half), 1.0, EXACT_TOL, "D(|0⟩‖1/2)")
    assert_close(dmax_pair(zero, half), 1.0, EXACT_TOL, "D_max(|0⟩‖1/2)")
    assert_close(fidelity_divergence(zero, half), 1.0, 1e-8, "D_1/2(|0⟩‖1/2)")
    assert_close(renyi_pair(zero, half, 2.0), 1.0, 1e-8, "D_2(|0⟩‖1/2)")


def test_support_failure_gives_infinity():
    """supp ρ ⊄ supp σ makes D and D_max infinite"""
    zero, one = pure(1, 0), pure(0, 1)
    assert not supported(zero, one), "orthogonal supports reported as nested"
    assert relative_entropy(zero, one) == math.inf, "D should be +inf"
    assert dmax_pair(zero, one) == math.inf, "D_max should be +inf"


def test_renyi_pair_monotone_in_alpha(random_qubits):
    """Sandwiched Rényi divergences increase with α"""
    sigma = np.diag([0.6, 0.4]).astype(complex)
    for rho in random_qubits:
        values = [renyi_pair(rho, sigma, a) for a in (0.5, 0.75, 1.0, 1.5, 2.0, math.inf)]
        assert all(a <= b + 1e-9 for a, b in zip(values, values[1:])), f"not monotone: {values}"


def test_neyman_pearson_basic():
    """Exact test of |0⟩ against 1/2 has β = 1/2 and Q = |0⟩⟨0|"""
    beta, q = neyman_pearson(pure(1, 0), np.eye(2) / 2, 0.0)
    assert_close(beta, 0.5, EXACT_TOL, "β")
    assert_close(float(np.real(np.trace(q @ pure(1, 0)))), 1.0, EXACT_TOL, "tr(Qρ)")


def test_neyman_pearson_randomized_level(mixed_qubit):
    """At level ε the test accepts exactly 1 − ε and β decreases with ε"""
    sigma = np.eye(2) / 2
    betas = []
    for eps in [0.0] + EPS_VALUES:
        beta, q = neyman_pearson(mixed_qubit, sigma, eps)
        assert_close(float(np.real(np.trace(q @ mixed_qubit))), 1 - eps, 1e-9, f"acceptance at ε={eps}")
        betas.append(beta)
    assert all(a >= b - 1e-12 for a, b in zip(betas, betas[1:])), f"β not decreasing: {betas}"


def test_neyman_pearson_rejects_bad_level():
    with pytest.raises(InvalidEpsilon):
        neyman_pearson(pure(1, 0), np.eye(2) / 2, 1.0)


# ---------------------------------------------------------------------------
# Divergences against subalgebras
# ---------------------------------------------------------------------------

def test_plus_state_against_diagonal(plus_state, diag2, opts):
    """|+⟩ against the diagonal algebra: D = D_max = D_min = D_H^0 = 1 bit"""
    dmax, _ = dmax_subalgebra(plus_state, diag2, opts)
    dmin, _ = dmin_subalgebra(plus_state, diag2, opts)
    dh, _ = dh_subalgebra(plus_state, diag2, 0.0, opts)
    d, _ = renyi_subalgebra(plus_state, diag2, 1.0, opts)
    for name, value in (("D_max", dmax), ("D_min", dmin), ("D_H^0", dh), ("D", d)):
        assert_close(value, PLUS_DIAGONAL_BITS, SOLVER_TOL, name)


def test_qubit_dmin_closed_form(mixed_qubit, diag2, opts):
    """Qubit D_min against the diagonal algebra depends on |ρ₀₁| only"""
    value, _ = dmin_subalgebra(mixed_qubit, diag2, opts)
    assert_close(value, qubit_dmin(0.2), SOLVER_TOL, "D_min")


def test_dh_of_free_state(diag2, opts):
    """ρ ∈ N gives D_H^ε(ρ‖N) = log₂ 1/(1 − ε)"""
    rho = np.diag([0.7, 0.3]).astype(complex)
    for eps in EPS_VALUES:
        value, _ = dh_subalgebra(rho, diag2, eps, opts)
        assert_close(value, math.log2(1 / (1 - eps)), SOLVER_TOL, f"D_H^{eps}")


def test_relative_entropy_against_trivial(rng):
    """D(ρ‖C·1) = log₂ d − H(ρ)"""
    N = make_trivial(3)
    rho = random_density(3, rng)
    value, sigma = renyi_subalgebra(rho, N, 1.0)
    assert_close(value, math.log2(3) - von_neumann_entropy(rho), 1e-9, "D(ρ‖trivial)")
    assert_close(float(np.abs(sigma - np.eye(3) / 3).max()), 0.0, EXACT_TOL, "optimal σ")


def test_renyi_two_classical(trivial2, opts):
    """D_2(diag(3/4, 1/4)‖trivial) = log₂ 1.25 through the local search"""
    rho = np.diag([0.75, 0.25]).astype(complex)
    value, _ = renyi_subalgebra(rho, trivial2, 2.0, opts)
    assert_close(value, CLASSICAL_ALPHA2_BITS, 1e-7, "D_2")


def test_divergence_ordering(random_qubits, diag2, opts):
    """D_min ≤ D ≤ D_2 ≤ D_max against the diagonal algebra"""
    for rho in random_qubits:
        dmin, _ = dmin_subalgebra(rho, diag2, opts)
        d, _ = renyi_subalgebra(rho, diag2, 1.0, opts)
        d2, _ = renyi_subalgebra(rho, diag2, 2.0, opts)
        dmax, _ = dmax_subalgebra(rho, diag2, opts)
        chain = [dmin, d, d2, dmax]
        assert all(a <= b + 1e-5 for a, b in zip(chain, chain[1:])), f"ordering broken: {chain}"


def test_relative_entropy_attained_by_expectation(mixed_qubit, diag2):
    """D(ρ‖N) = D(ρ‖E_N(ρ)) lies below D(ρ‖σ) for other free σ"""
    value, _ = renyi_subalgebra(mixed_qubit, diag2, 1.0)
    assert_close(value, relative_entropy(mixed_qubit, conditional_expectation(diag2, mixed_qubit)), 1e-12, "D")
    for p in (0.2, 0.5, 0.9):
        other = relative_entropy(mixed_qubit, np.diag([p, 1 - p]))
        assert value <= other + 1e-12, f"σ = diag({p}) beats E_N(ρ)"


def test_shape_mismatch(diag2, opts):
    with pytest.raises(DimensionMismatch):
        dmax_subalgebra(np.eye(3) / 3, diag2, opts)


def test_invalid_epsilon(mixed_qubit, diag2, opts):
    for eps in (-0.1, 1.0):
        with pytest.raises(InvalidEpsilon):
            dh_subalgebra(mixed_qubit, diag2, eps, opts)


# ---------------------------------------------------------------------------
# Certificates
# ---------------------------------------------------------------------------

def test_certificates_verify(mixed_qubit, swap_algebra, diag2, rng):
    """Primal and dual points survive independent re-verification"""
    rho = random_density(4, rng)
    certs = [
        dmax_subalgebra(rho, swap_algebra, VERIFY_OPTS)[1],
        dh_subalgebra(rho, swap_algebra, SMALL_EPS, VERIFY_OPTS)[1],
        dmin_subalgebra(rho, swap_algebra, VERIFY_OPTS)[1],
        smooth_dmax_subalgebra(mixed_qubit, diag2, SMALL_EPS, VERIFY_OPTS)[1],
    ]
    for cert in certs:
        check = verify(cert)
        assert check.passed, (
            f"{cert.kind}: primal {check.primal_residual:.2e}, dual {check.dual_residual:.2e}, gap {check.gap:.2e}"
        )
        assert cert.converged, f"{cert.kind} gap {cert.gap:.2e}"


def test_certificate_json(plus_state, diag2, opts):
    """Audit JSON carries the objectives and matrix payloads"""
    _, cert = dmax_subalgebra(plus_state, diag2, opts)
    payload = cert.to_json()
    assert payload["kind"] == "dmax_subalgebra", f"kind {payload['kind']}"
    assert set(payload["primal"]["X"]) >= {"rows", "cols", "data"}, "X is not a matrix payload"
    assert payload["gap"] >= 0, "negative gap"


# ---------------------------------------------------------------------------
# Smoothing
# ---------------------------------------------------------------------------

def test_smooth_dmax_decreases_with_eps(mixed_qubit, diag2, opts):
    """D_max^ε(ρ‖N) is non-increasing in ε and equals D_max at ε = 0"""
    values = [smooth_dmax_subalgebra(mixed_qubit, diag2, eps, opts)[0] for eps in [0.0] + EPS_VALUES]
    exact, _ = dmax_subalgebra(mixed_qubit, diag2, opts)
    assert_close(values[0], exact, SOLVER_TOL, "D_max^0")
    assert all(a >= b - 1e-6 for a, b in zip(values, values[1:])), f"not decreasing: {values}"


def test_smooth_dmax_optimizer_in_ball(mixed_qubit, diag2, opts):
    """The returned ρ' is a substate within purified distance ε"""
    _, _, rho_prime = smooth_dmax_subalgebra(mixed_qubit, diag2, SMALL_EPS, opts)
    assert float(np.real(np.trace(rho_prime))) <= 1 + 1e-9, "smoothed operator exceeds unit trace"
    assert purified_distance(mixed_qubit, rho_prime) <= SMALL_EPS + 1e-5, "smoothed state left the ball"


def test_smooth_dmax_pair(mixed_qubit, opts):
    """Pair smoothing returns the closed form at ε = 0 and decreases for ε > 0"""
    sigma = np.eye(2) / 2
    exact, cert, _ = smooth_dmax_pair(mixed_qubit, sigma, 0.0, opts)
    assert cert is None, "closed form should not carry a certificate"
    assert_close(exact, dmax_pair(mixed_qubit, sigma), 0.0, "D_max^0 against σ")
    smoothed, cert, _ = smooth_dmax_pair(mixed_qubit, sigma, SMALL_EPS, opts)
    assert smoothed <= exact + 1e-6, f"smoothing increased D_max: {smoothed} > {exact}"
    assert cert.kind == "dmax_pair_smooth", f"kind {cert.kind}"


def test_smooth_dmin_increases_with_eps(mixed_qubit, diag2, opts):
    """Smoothing can only raise D_min, and the search reports every start"""
    base, _ = dmin_subalgebra(mixed_qubit, diag2, opts)
    value, rho_prime, report = smooth_dmin_subalgebra(mixed_qubit, diag2, SMALL_EPS, opts)
    assert value >= base - 1e-5, f"D_min^ε = {value} below D_min = {base}"
    assert report.starts == opts.multi_start, f"{report.starts} starts"
    assert len(report.values) == report.starts, "missing start values"
    assert rho_prime.shape == (2, 2), f"optimizer shape {rho_prime.shape}"


def test_solver_options_validation():
    with pytest.raises(ValueError):
        SolverOptions(tol=0.0)
    with pytest.raises(ValueError):
        SolverOptions(multi_start=0)


def test_dh_against_state_grid(mixed_qubit, diag2, opts):
    """Composite D_H^ε equals the minimum of fixed-σ tests over diag(p, 1 − p)"""
    value, _ = dh_subalgebra(mixed_qubit, diag2, SMALL_EPS, opts)
    grid = min(
        -math.log2(neyman_pearson(mixed_qubit, sigma, SMALL_EPS)[0])
        for sigma in state_grid(diag2, 4001)
    )
    assert grid >= value - 1e-6, f"grid {grid:.8f} below composite value {value:.8f}"
    assert grid <= value + 1e-4, f"grid {grid:.8f} above composite value {value:.8f}"
