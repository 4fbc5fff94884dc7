"""Dense complex-matrix primitives: eigendecomposition, matrix functions, tensors, distances"""
import logging
import math
from typing import Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg

from config.config import settings
from modules.exceptions import DimensionMismatch, NonHermitian
from modules.linops.schema import DensityOperator

logger = logging.getLogger(__name__)

MatrixLike = Union[np.ndarray, DensityOperator]


def as_array(m: MatrixLike) -> np.ndarray:
    """Return the underlying complex array of a matrix or density operator"""
    if isinstance(m, DensityOperator):
        return m.matrix
    return np.asarray(m, dtype=complex)


def log2(x: float) -> float:
    """Base-2 logarithm with log2(0) = -inf and log2(inf) = inf"""
    if x <= 0:
        return -math.inf
    if math.isinf(x):
        return math.inf
    return math.log2(x)


def hermitize(m: MatrixLike) -> np.ndarray:
    """Symmetrize a near-Hermitian matrix, rejecting genuine asymmetry

    Args:
        m: Square complex matrix

    Returns:
        (m + m*) / 2

    Raises:
        NonHermitian: if ||m - m*|| exceeds the tolerance relative to ||m||
    """
    m = as_array(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch("expected a square matrix", shape=m.shape)
    scale = max(np.abs(m).max(initial=0.0), 1e-300)
    asym = np.abs(m - m.conj().T).max(initial=0.0)
    if asym > settings.HERMITIAN_TOL * max(scale, 1.0):
        raise NonHermitian("matrix is not Hermitian", asymmetry=f"{asym:.3e}")
    return (m + m.conj().T) / 2


def eig_hermitian(m: MatrixLike) -> Tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix

    Args:
        m: Hermitian matrix

    Returns:
        Ascending real eigenvalues and the unitary whose columns are eigenvectors
    """
    h = hermitize(m)
    evals, evecs = scipy.linalg.eigh(h)
    return evals, evecs


def _support_cutoff(evals: np.ndarray) -> float:
    top = np.abs(evals).max(initial=0.0)
    return settings.SUPPORT_TOL * top


def matrix_power(m: MatrixLike, p: float) -> np.ndarray:
    """Power of a PSD matrix, acting on the support for p <= 0

    Eigenvalues below the support cutoff map to zero for non-positive
    exponents (pseudo-inverse convention) and are clipped at zero otherwise.
    """
    evals, evecs = eig_hermitian(m)
    cutoff = _support_cutoff(evals)
    powered = np.zeros_like(evals)
    mask = evals > cutoff
    powered[mask] = evals[mask] ** p
    if p > 0:
        powered[~mask] = 0.0
    return (evecs * powered) @ evecs.conj().T


def matrix_log2(m: MatrixLike) -> np.ndarray:
    """Base-2 logarithm of a PSD matrix on its support (zero on the kernel)"""
    evals, evecs = eig_hermitian(m)
    cutoff = _support_cutoff(evals)
    logs = np.zeros_like(evals)
    mask = evals > cutoff
    logs[mask] = np.log2(evals[mask])
    return (evecs * logs) @ evecs.conj().T


def support_projection(m: MatrixLike) -> np.ndarray:
    """Projection onto the span of eigenvectors with eigenvalue above the cutoff"""
    evals, evecs = eig_hermitian(m)
    vecs = evecs[:, evals > _support_cutoff(evals)]
    return vecs @ vecs.conj().T


def kron(a: MatrixLike, b: MatrixLike) -> np.ndarray:
    """Kronecker product"""
    return np.kron(as_array(a), as_array(b))


def kron_power(a: MatrixLike, n: int) -> np.ndarray:
    """n-fold tensor power a ⊗ ... ⊗ a"""
    out = np.ones((1, 1), dtype=complex)
    for _ in range(n):
        out = np.kron(out, as_array(a))
    return out


def _check_dims(m: np.ndarray, dims: Sequence[int]) -> None:
    total = int(np.prod(dims))
    if m.shape != (total, total):
        raise DimensionMismatch(
            "factor dimensions do not match matrix", dims=list(dims), shape=m.shape
        )


def partial_trace(m: MatrixLike, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out every tensor factor not listed in keep

    Args:
        m: Operator on the tensor product of spaces with the given dimensions
        dims: Factor dimensions, in tensor order
        keep: Indices of factors to keep (output keeps their original order)

    Returns:
        Reduced operator on the kept factors
    """
    m = as_array(m)
    dims = [int(d) for d in dims]
    _check_dims(m, dims)
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise DimensionMismatch("keep index out of range", keep=keep, factors=len(dims))
    n = len(dims)
    traced = [i for i in range(n) if i not in keep]
    tensor = m.reshape(dims + dims)
    # Contract each traced factor's row index with its column index
    for offset, i in enumerate(traced):
        axis = i - offset
        current = tensor.ndim // 2
        tensor = np.trace(tensor, axis1=axis, axis2=axis + current)
    kept_dim = int(np.prod([dims[k] for k in keep])) if keep else 1
    return tensor.reshape(kept_dim, kept_dim)


def permute_subsystems(m: MatrixLike, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors of an operator or a column vector

    The factor at position perm[i] of the input becomes factor i of the output.
    """
    m = as_array(m)
    dims = [int(d) for d in dims]
    n = len(dims)
    perm = [int(p) for p in perm]
    if sorted(perm) != list(range(n)):
        raise DimensionMismatch("perm is not a permutation", perm=perm)
    total = int(np.prod(dims))
    new_dims = [dims[p] for p in perm]
    if m.ndim == 1 or (m.ndim == 2 and m.shape[1] == 1 and m.shape[0] == total and total != 1):
        vec = m.reshape(dims).transpose(perm)
        return vec.reshape(m.shape)
    _check_dims(m, dims)
    tensor = m.reshape(dims + dims).transpose(perm + [n + p for p in perm])
    return tensor.reshape(int(np.prod(new_dims)), int(np.prod(new_dims)))


def permutation_matrix(dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Unitary P with P (x_0 ⊗ ... ⊗ x_{n-1}) = x_{perm[0]} ⊗ ... ⊗ x_{perm[n-1]}"""
    total = int(np.prod(dims))
    cols = [permute_subsystems(col, dims, perm) for col in np.eye(total, dtype=complex)]
    return np.array(cols).T


def trace_norm(m: MatrixLike) -> float:
    """Sum of singular values"""
    return float(np.sum(scipy.linalg.svdvals(as_array(m))))


def operator_norm(m: MatrixLike) -> float:
    """Largest singular value"""
    m = as_array(m)
    if m.size == 0:
        return 0.0
    return float(scipy.linalg.svdvals(m)[0])


def _state_trace(m: np.ndarray) -> float:
    return float(np.real(np.trace(m)))


def root_fidelity(rho: MatrixLike, sigma: MatrixLike) -> float:
    """Generalized root fidelity tr|√ρ√σ| + √((1 − tr ρ)(1 − tr σ))"""
    r = as_array(rho)
    s = as_array(sigma)
    if r.shape != s.shape:
        raise DimensionMismatch("fidelity arguments differ in shape", left=r.shape, right=s.shape)
    overlap = trace_norm(matrix_power(r, 0.5) @ matrix_power(s, 0.5))
    correction = math.sqrt(max(0.0, 1 - _state_trace(r)) * max(0.0, 1 - _state_trace(s)))
    return float(min(1.0, overlap + correction))


def purified_distance(rho: MatrixLike, sigma: MatrixLike) -> float:
    """√(1 − F²) with the generalized fidelity"""
    f = root_fidelity(rho, sigma)
    return math.sqrt(max(0.0, 1 - f * f))


def von_neumann_entropy(rho: MatrixLike) -> float:
    """H(ρ) = −tr ρ log₂ ρ"""
    evals = eig_hermitian(rho)[0]
    evals = evals[evals > _support_cutoff(evals)]
    return float(-np.sum(evals * np.log2(evals)))


def min_entropy(rho: MatrixLike) -> float:
    """H_min(ρ) = −log₂ λ_max(ρ)"""
    return -log2(float(eig_hermitian(rho)[0][-1]))


def is_psd(m: MatrixLike, tol: Optional[float] = None) -> bool:
    """Smallest eigenvalue at least −tol"""
    tol = settings.PSD_TOL if tol is None else tol
    return bool(eig_hermitian(m)[0][0] >= -tol)


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a Ginibre matrix"""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def random_pure_state(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unit vector"""
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def random_density(d: int, rng: np.random.Generator, rank: Optional[int] = None) -> np.ndarray:
    """Random density matrix from the induced measure of the given rank"""
    rank = d if rank is None else rank
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = g @ g.conj().T
    return rho / np.real(np.trace(rho))


def random_hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    """Random Hermitian matrix with Gaussian entries"""
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (g + g.conj().T) / 2


def ket(index: int, d: int) -> np.ndarray:
    """Computational basis vector"""
    v = np.zeros(d, dtype=complex)
    v[index] = 1.0
    return v


def projector(v: np.ndarray) -> np.ndarray:
    """Rank-one projector onto the span of v (normalized)"""
    v = np.asarray(v, dtype=complex).reshape(-1)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())
