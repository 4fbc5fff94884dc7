"""Subalgebra constructions, conditional expectations and the Pimsner–Popa index"""
import logging
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
import scipy.optimize

from config.config import settings
from modules.algebra.schema import PimsnerPopaIndex, SubalgebraStructure, block_sort_key
from modules.exceptions import ConstructionFailed, DimensionMismatch, DimensionTooLarge, NonConvergence
from modules.linops import (
    as_array,
    eig_hermitian,
    operator_norm,
    partial_trace,
    permutation_matrix,
    random_density,
    random_pure_state,
)
from modules.linops.schema import Projection

logger = logging.getLogger(__name__)


def assemble_structure(d: int, pieces: Sequence[Tuple[Tuple[int, int], np.ndarray]]) -> SubalgebraStructure:
    """Build a structure from (block, rows) pieces, sorting blocks stably

    Each piece carries the m·n rows of the basis unitary that span its block,
    already ordered multiplicity-first.
    """
    order = sorted(range(len(pieces)), key=lambda i: block_sort_key(pieces[i][0]))
    blocks = [pieces[i][0] for i in order]
    rows = np.vstack([pieces[i][1] for i in order])
    return SubalgebraStructure(ambient_dim=d, blocks=blocks, basis_unitary=rows)


def make_full(d: int) -> SubalgebraStructure:
    """The full matrix algebra B(C^d)"""
    return SubalgebraStructure(ambient_dim=d, blocks=[(1, d)], basis_unitary=np.eye(d))


def make_diagonal(d: int) -> SubalgebraStructure:
    """Diagonal (incoherent) subalgebra of B(C^d)"""
    if d < 1:
        raise DimensionMismatch("dimension must be positive", d=d)
    return SubalgebraStructure(ambient_dim=d, blocks=[(1, 1)] * d, basis_unitary=np.eye(d))


def make_trivial(d: int) -> SubalgebraStructure:
    """Scalar subalgebra C·1 of B(C^d)"""
    if d < 1:
        raise DimensionMismatch("dimension must be positive", d=d)
    return SubalgebraStructure(ambient_dim=d, blocks=[(d, 1)], basis_unitary=np.eye(d))


def make_tensor_factor(m: int, n: int, keep_first: bool = False) -> SubalgebraStructure:
    """Tensor-factor subalgebra of B(C^m ⊗ C^n)

    Args:
        m: Dimension of the first factor
        n: Dimension of the second factor
        keep_first: Build M_m ⊗ 1_n when true, 1_m ⊗ M_n otherwise

    Returns:
        Single-block structure; M_m ⊗ 1_n has multiplicity n and block dimension m
    """
    if m < 1 or n < 1:
        raise DimensionMismatch("factor dimensions must be positive", m=m, n=n)
    if not keep_first:
        return SubalgebraStructure(ambient_dim=m * n, blocks=[(m, n)], basis_unitary=np.eye(m * n))
    swap = permutation_matrix([m, n], [1, 0])
    return SubalgebraStructure(ambient_dim=m * n, blocks=[(n, m)], basis_unitary=swap)


def to_canonical(N: SubalgebraStructure, x: np.ndarray) -> np.ndarray:
    u = N.basis_unitary
    return u @ as_array(x) @ u.conj().T


def from_canonical(N: SubalgebraStructure, x: np.ndarray) -> np.ndarray:
    u = N.basis_unitary
    return u.conj().T @ as_array(x) @ u


def _check_square(N: SubalgebraStructure, x: np.ndarray) -> np.ndarray:
    x = as_array(x)
    if x.shape != (N.ambient_dim, N.ambient_dim):
        raise DimensionMismatch(
            "operator does not act on the ambient space", shape=x.shape, dim=N.ambient_dim
        )
    return x


def block_compressions(N: SubalgebraStructure, x: np.ndarray) -> List[np.ndarray]:
    """A_k(x) = tr_multiplicity(P_k x P_k) / m_k for every block"""
    xt = to_canonical(N, _check_square(N, x))
    out = []
    for (m, n), o in zip(N.blocks, N.offsets):
        sub = xt[o:o + m * n, o:o + m * n]
        out.append(partial_trace(sub, [m, n], keep=[1]) / m)
    return out


def embed_blocks(N: SubalgebraStructure, parts: Sequence[np.ndarray]) -> np.ndarray:
    """U* (⊕ₖ 1_{m_k} ⊗ x_k) U for block data x_k"""
    d = N.ambient_dim
    xt = np.zeros((d, d), dtype=complex)
    for (m, n), o, part in zip(N.blocks, N.offsets, parts):
        xt[o:o + m * n, o:o + m * n] = np.kron(np.eye(m), part)
    return from_canonical(N, xt)


def conditional_expectation(N: SubalgebraStructure, x: np.ndarray) -> np.ndarray:
    """Trace-preserving conditional expectation onto N

    On block k the canonical form is 1_{m_k}/m_k ⊗ tr_multiplicity(P_k x P_k);
    entries between different blocks are dropped.
    """
    return embed_blocks(N, block_compressions(N, x))


def membership_residual(N: SubalgebraStructure, x: np.ndarray) -> float:
    """Operator norm of E_N(x) − x"""
    x = _check_square(N, x)
    return operator_norm(conditional_expectation(N, x) - x)


def membership(N: SubalgebraStructure, x: np.ndarray, tol: float = 1e-9) -> bool:
    """Whether x lies in N to the given tolerance"""
    return membership_residual(N, x) <= tol


def expectation_choi(N: SubalgebraStructure) -> np.ndarray:
    """Choi matrix Σ_ij E_ij ⊗ E_N(E_ij) of the conditional expectation"""
    d = N.ambient_dim
    choi = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            unit = np.zeros((d, d), dtype=complex)
            unit[i, j] = 1.0
            choi += np.kron(unit, conditional_expectation(N, unit))
    return choi


def random_element(N: SubalgebraStructure, rng: np.random.Generator, hermitian: bool = True) -> np.ndarray:
    """Random operator in N from Gaussian block data"""
    parts = []
    for _, n in N.blocks:
        g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        parts.append((g + g.conj().T) / 2 if hermitian else g)
    return embed_blocks(N, parts)


def random_state_in(N: SubalgebraStructure, rng: np.random.Generator, full_rank: bool = True) -> np.ndarray:
    """Random state of S(N); full rank unless asked otherwise"""
    parts = []
    for _, n in N.blocks:
        rank = n if full_rank else int(rng.integers(1, n + 1))
        parts.append(random_density(n, rng, rank=rank) * rng.uniform(0.2, 1.0))
    sigma = embed_blocks(N, parts)
    return sigma / np.real(np.trace(sigma))


def pimsner_popa_index(N: SubalgebraStructure) -> PimsnerPopaIndex:
    """Pimsner–Popa index with λ⁻¹ = Σₖ m_k·min{m_k, n_k}, m_k the multiplicity"""
    inverse = sum(m * min(m, n) for m, n in N.blocks)
    return PimsnerPopaIndex(inverse=inverse)


def index_projection(N: SubalgebraStructure) -> Tuple[Projection, Projection]:
    """Rank-one e and projection f in N with E_N(e) = λ·f

    Every block contributes a maximally entangled vector of Schmidt rank
    r_k = min{m_k, n_k} weighted by p_k = λ·m_k·r_k.

    Raises:
        ConstructionFailed: if E_N(e) = λ·f does not hold to 1e-9
    """
    lam = pimsner_popa_index(N).value
    try:
        return _assemble_index_projection(N, lam, range(len(N.blocks)))
    except ConstructionFailed as exc:
        best = max(range(len(N.blocks)), key=lambda k: N.blocks[k][0] * min(N.blocks[k]))
        m, n = N.blocks[best]
        logger.warning(f"Direct-sum index projection failed ({exc}); falling back to block {best}")
        return _assemble_index_projection(N, 1.0 / (m * min(m, n)), [best])


def _assemble_index_projection(N: SubalgebraStructure, lam: float, chosen: Sequence[int]):
    d = N.ambient_dim
    vt = np.zeros(d, dtype=complex)
    ft = np.zeros((d, d), dtype=complex)
    for k in chosen:
        (m, n), o = N.blocks[k], N.offsets[k]
        r = min(m, n)
        phi = np.zeros(m * n, dtype=complex)
        for i in range(r):
            phi[i * n + i] = 1.0 / np.sqrt(r)
        weight = lam * m * r
        vt[o:o + m * n] = np.sqrt(weight) * phi
        local = np.zeros((n, n), dtype=complex)
        local[:r, :r] = np.eye(r)
        ft[o:o + m * n, o:o + m * n] = np.kron(np.eye(m), local)
    u = N.basis_unitary
    v = u.conj().T @ vt
    e = np.outer(v, v.conj())
    f = from_canonical(N, ft)
    residual = np.abs(conditional_expectation(N, e) - lam * f).max()
    if residual > 1e-9 or abs(np.linalg.norm(v) - 1) > 1e-9:
        raise ConstructionFailed("index projection identity fails", residual=f"{residual:.2e}")
    return Projection(matrix=e), Projection(matrix=f)


def flat_index_state(N: SubalgebraStructure) -> np.ndarray:
    """Maximally N-coherent state e/tr(e)"""
    e, _ = index_projection(N)
    return e.matrix / np.real(np.trace(e.matrix))


def _rank_one_index(N: SubalgebraStructure, v: np.ndarray) -> float:
    """Largest λ with λ|v⟩⟨v| ⪯ E_N(|v⟩⟨v|), for unit v"""
    v = v / np.linalg.norm(v)
    evals, evecs = eig_hermitian(conditional_expectation(N, np.outer(v, v.conj())))
    mask = evals > 1e-10 * evals[-1]
    amps = np.abs(evecs[:, mask].conj().T @ v) ** 2
    return float(1.0 / np.sum(amps / evals[mask]))


def index_by_sdp(N: SubalgebraStructure, seed: Optional[int] = None, samples: int = 64) -> float:
    """Variational Pimsner–Popa index: min over unit ψ of 1/⟨ψ|E_N(ψ)⁺|ψ⟩

    Several independent batches of random starts are locally refined; only the
    searched values enter the batch minima. The rank-one vector of
    index_projection is evaluated separately and logged when it beats the search.

    Raises:
        NonConvergence: if the batch minima spread by more than 1e-5
    """
    rng = np.random.default_rng(settings.SEED if seed is None else seed)
    d = N.ambient_dim
    candidate = _rank_one_index(N, np.linalg.eigh(index_projection(N)[0].matrix)[1][:, -1])

    def objective(theta: np.ndarray) -> float:
        return _rank_one_index(N, theta[:d] + 1j * theta[d:])

    batch_minima = []
    for batch in range(settings.MULTI_START):
        starts = [random_pure_state(d, rng) for _ in range(samples)]
        values = [_rank_one_index(N, s) for s in starts]
        best = int(np.argmin(values))
        x0 = np.concatenate([starts[best].real, starts[best].imag])
        polished = scipy.optimize.minimize(objective, x0, method="Powell", options={"maxiter": 200})
        batch_minima.append(min(values[best], float(polished.fun)))
        logger.debug(f"index batch {batch}: min {batch_minima[-1]:.8f}")
    spread = max(batch_minima) - min(batch_minima)
    if spread > 1e-5:
        raise NonConvergence("index search batches disagree", spread=f"{spread:.2e}")
    found = float(min(batch_minima))
    if candidate < found - 1e-5:
        logger.warning(f"index search {found:.8f} missed the index projection value {candidate:.8f}")
    return found


def tensor_product(N: SubalgebraStructure, M: SubalgebraStructure) -> SubalgebraStructure:
    """Structure of N ⊗ M acting on the product of the ambient spaces"""
    d1, d2 = N.ambient_dim, M.ambient_dim
    base = np.kron(N.basis_unitary, M.basis_unitary)
    pieces = []
    for (m1, n1), o1 in zip(N.blocks, N.offsets):
        for (m2, n2), o2 in zip(M.blocks, M.offsets):
            rows = []
            # multiplicity (a1, a2) first, block (b1, b2) second
            for a1 in range(m1):
                for a2 in range(m2):
                    for b1 in range(n1):
                        for b2 in range(n2):
                            i1 = o1 + a1 * n1 + b1
                            i2 = o2 + a2 * n2 + b2
                            rows.append(base[i1 * d2 + i2])
            pieces.append(((m1 * m2, n1 * n2), np.array(rows)))
    return assemble_structure(d1 * d2, pieces)


def tensor_power(N: SubalgebraStructure, n: int) -> SubalgebraStructure:
    """n-fold tensor power N^⊗n

    Raises:
        DimensionTooLarge: if d^n exceeds the configured maximum
    """
    if n < 1:
        raise DimensionMismatch("tensor power must be at least 1", n=n)
    if N.ambient_dim ** n > settings.MAX_DIM:
        raise DimensionTooLarge(
            "tensor power exceeds dimension guard", dim=N.ambient_dim ** n, limit=settings.MAX_DIM
        )
    out = N
    for _ in range(n - 1):
        out = tensor_product(out, N)
    return out


def supports_state_grid(N: SubalgebraStructure) -> bool:
    """S(N) is a one-parameter family exactly for two blocks of dimension one"""
    return len(N.blocks) == 2 and all(n == 1 for _, n in N.blocks)


def state_grid(N: SubalgebraStructure, points: int) -> Iterator[np.ndarray]:
    """Sweep the segment S(N) for two one-dimensional blocks"""
    if not supports_state_grid(N):
        raise DimensionMismatch("state grid needs two blocks of dimension one", blocks=N.blocks)
    (m1, _), (m2, _) = N.blocks
    for p in np.linspace(0.0, 1.0, points):
        yield embed_blocks(N, [np.array([[p / m1]]), np.array([[(1 - p) / m2]])])
