"""Stinespring dilations of conditional expectations, purifications and dilated states"""
import logging
from typing import List, Optional, Tuple

import numpy as np

from config.config import settings
from modules.algebra import (
    SubalgebraStructure,
    conditional_expectation,
    membership,
    random_element,
)
from modules.dilation.schema import (
    DomainSample,
    MultiplicativeDomainReport,
    OrderInequalityReport,
    StinespringIsometry,
    TripartitePureState,
)
from modules.exceptions import DimensionMismatch
from modules.linops import (
    as_array,
    eig_hermitian,
    operator_norm,
    permute_subsystems,
    random_density,
    random_hermitian,
)
from modules.linops.schema import Projection

logger = logging.getLogger(__name__)


def kraus_operators(N: SubalgebraStructure) -> List[np.ndarray]:
    """Kraus operators (1/√m_k)(|i⟩⟨j| ⊗ 1_{n_k}) P_k, block-major then i then j"""
    d = N.ambient_dim
    u = N.basis_unitary
    kraus = []
    for (m, n), o in zip(N.blocks, N.offsets):
        for i in range(m):
            for j in range(m):
                local = np.zeros((d, d), dtype=complex)
                unit = np.zeros((m, m), dtype=complex)
                unit[i, j] = 1.0
                local[o:o + m * n, o:o + m * n] = np.kron(unit, np.eye(n)) / np.sqrt(m)
                kraus.append(u.conj().T @ local @ u)
    return kraus


def stinespring(N: SubalgebraStructure) -> StinespringIsometry:
    """Isometry V = Σ_r K_r ⊗ |r⟩_E with E_N(x) = tr_E(VxV*) = V*(x ⊗ 1_E)V"""
    kraus = kraus_operators(N)
    d, de = N.ambient_dim, len(kraus)
    v = np.zeros((d * de, d), dtype=complex)
    for r, k in enumerate(kraus):
        env = np.zeros((de, 1), dtype=complex)
        env[r, 0] = 1.0
        v += np.kron(k, env)
    logger.debug(f"Stinespring isometry for blocks {N.blocks}: d_E = {de}")
    return StinespringIsometry(dim_in=d, dim_env=de, matrix=v)


def range_projection(V: StinespringIsometry) -> Projection:
    """e = VV*, in (A, E) order"""
    return Projection(matrix=V.matrix @ V.matrix.conj().T)


def environment_first(m: np.ndarray, d: int, d_env: int) -> np.ndarray:
    """Reorder an (A, E) operator to (E, A)"""
    return permute_subsystems(m, [d, d_env], [1, 0])


def dilate_state(V: StinespringIsometry, rho: np.ndarray) -> np.ndarray:
    """VρV* as an operator on H_E ⊗ H_A"""
    rho = as_array(rho)
    if rho.shape != (V.dim_in, V.dim_in):
        raise DimensionMismatch("state does not match isometry input", shape=rho.shape, dim=V.dim_in)
    return environment_first(V.matrix @ rho @ V.matrix.conj().T, V.dim_in, V.dim_env)


def _fix_phase(vec: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude component real positive"""
    k = int(np.argmax(np.abs(vec)))
    return vec * (abs(vec[k]) / vec[k])


def purify(rho: np.ndarray) -> Tuple[np.ndarray, int]:
    """Purification |ψ⟩ = Σᵢ √λᵢ |vᵢ⟩ ⊗ |i⟩_F with d_F = rank(ρ)

    Eigenvalues are taken in descending order.

    Returns:
        Unit vector on H_A ⊗ H_F and d_F
    """
    evals, evecs = eig_hermitian(rho)
    evals, evecs = evals[::-1], evecs[:, ::-1]
    keep = evals > settings.SUPPORT_TOL * max(evals[0], 1e-300)
    evals, evecs = evals[keep], evecs[:, keep]
    d, d_f = evecs.shape[0], len(evals)
    psi = np.zeros(d * d_f, dtype=complex)
    for i in range(d_f):
        anc = np.zeros(d_f, dtype=complex)
        anc[i] = 1.0
        psi += np.sqrt(evals[i]) * np.kron(_fix_phase(evecs[:, i]), anc)
    return psi / np.linalg.norm(psi), d_f


def build_xi(V: StinespringIsometry, rho: np.ndarray) -> TripartitePureState:
    """ξ = (V ⊗ 1_F)|ψ⟩ reordered to E ⊗ A ⊗ F, a purification of VρV*"""
    rho = as_array(rho)
    if rho.shape != (V.dim_in, V.dim_in):
        raise DimensionMismatch("state does not match isometry input", shape=rho.shape, dim=V.dim_in)
    psi, d_f = purify(rho)
    lifted = np.kron(V.matrix, np.eye(d_f)) @ psi
    ordered = permute_subsystems(lifted, [V.dim_in, V.dim_env, d_f], [1, 0, 2])
    return TripartitePureState(dims=(V.dim_env, V.dim_in, d_f), vector=ordered / np.linalg.norm(ordered))


def multiplicative_domain_check(
    N: SubalgebraStructure,
    V: StinespringIsometry,
    samples: int = 30,
    seed: Optional[int] = None,
    tol: float = 1e-9,
) -> MultiplicativeDomainReport:
    """Commutators ‖(a ⊗ 1_E)VV* − VV*(a ⊗ 1_E)‖ for random a in and outside N

    The identity comes first; the remaining samples alternate between
    elements of N and generic Hermitian operators. Membership is
    re-evaluated for every sample.
    """
    rng = np.random.default_rng(settings.SEED if seed is None else seed)
    e = range_projection(V).matrix
    eye_env = np.eye(V.dim_env)
    report = MultiplicativeDomainReport(tol=tol)
    for s in range(samples):
        if s == 0:
            a = np.eye(N.ambient_dim, dtype=complex)
        elif s % 2 == 1:
            a = random_element(N, rng)
        else:
            a = random_hermitian(N.ambient_dim, rng)
        a = a / max(operator_norm(a), 1e-300)
        lifted = np.kron(a, eye_env)
        norm = operator_norm(lifted @ e - e @ lifted)
        report.samples.append(DomainSample(in_algebra=membership(N, a, tol=tol), commutator_norm=norm))
    logger.info(f"Multiplicative domain check: {samples} samples, consistent={report.consistent}")
    return report


def order_inequality_check(
    N: SubalgebraStructure,
    V: StinespringIsometry,
    samples: int = 30,
    seed: Optional[int] = None,
    tol: float = 1e-8,
) -> OrderInequalityReport:
    """λ_min(E(x) ⊗ 1_E − V E(x) V*) for random PSD x"""
    rng = np.random.default_rng(settings.SEED if seed is None else seed)
    eye_env = np.eye(V.dim_env)
    report = OrderInequalityReport(tol=tol)
    for _ in range(samples):
        x = random_density(N.ambient_dim, rng) * rng.uniform(0.5, 3.0)
        ex = conditional_expectation(N, x)
        gap = np.kron(ex, eye_env) - V.matrix @ ex @ V.matrix.conj().T
        report.min_eigenvalues.append(float(eig_hermitian(gap)[0][0]))
    return report
