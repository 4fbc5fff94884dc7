"""Structure decomposition of *-algebras given by generators"""
import logging
from typing import List, Optional, Sequence

import numpy as np
import scipy.linalg

from config.config import settings
from modules.algebra.algebra_service import assemble_structure, make_full, membership_residual
from modules.algebra.schema import SubalgebraStructure
from modules.exceptions import DegenerateSample, DimensionMismatch, NotClosedUnderStar
from modules.linops import eig_hermitian

logger = logging.getLogger(__name__)

_NULL_RCOND = 1e-10
_NULL_ATOL = 1e-10


def _null_space(system: np.ndarray) -> np.ndarray:
    """Null space with singular values below max(atol, rcond·s_max) treated as zero"""
    _, s, vh = scipy.linalg.svd(system, full_matrices=True)
    tol = max(_NULL_ATOL, _NULL_RCOND * (float(s.max()) if s.size else 0.0))
    rank = int(np.sum(s > tol))
    return vh[rank:].conj().T


def _full_basis(d: int) -> List[np.ndarray]:
    basis = []
    for i in range(d):
        for j in range(d):
            unit = np.zeros((d, d), dtype=complex)
            unit[i, j] = 1.0
            basis.append(unit)
    return basis


def commutant_basis(mats: Sequence[np.ndarray], d: int) -> List[np.ndarray]:
    """Orthonormal basis of {x : gx = xg for every g in mats}"""
    mats = [g / np.linalg.norm(g) for g in mats if np.linalg.norm(g) > 0]
    if not mats:
        return _full_basis(d)
    eye = np.eye(d)
    # row-major vec: vec(gx) = (g ⊗ 1) vec(x), vec(xg) = (1 ⊗ gᵀ) vec(x)
    system = np.vstack([np.kron(g, eye) - np.kron(eye, g.T) for g in mats])
    null = _null_space(system)
    return [null[:, k].reshape(d, d) for k in range(null.shape[1])]


def _span_residual(basis: Sequence[np.ndarray], x: np.ndarray) -> float:
    flat = np.array([b.reshape(-1) for b in basis]).T
    coeffs, *_ = np.linalg.lstsq(flat, x.reshape(-1), rcond=None)
    return float(np.linalg.norm(flat @ coeffs - x.reshape(-1)))


def _center_basis(basis: Sequence[np.ndarray]) -> List[np.ndarray]:
    """Elements of span(basis) commuting with the whole span"""
    k = len(basis)
    columns = []
    for i in range(k):
        columns.append(np.concatenate([(basis[i] @ b - b @ basis[i]).reshape(-1) for b in basis]))
    system = np.array(columns).T
    null = _null_space(system)
    return [sum(null[i, c] * basis[i] for i in range(k)) for c in range(null.shape[1])]


def _random_hermitian_in(basis: Sequence[np.ndarray], rng: np.random.Generator) -> np.ndarray:
    if not basis:
        raise DegenerateSample("cannot sample from an empty basis")
    coeffs = rng.standard_normal(len(basis)) + 1j * rng.standard_normal(len(basis))
    x = sum(c * b for c, b in zip(coeffs, basis))
    h = (x + x.conj().T) / 2
    return h / max(np.abs(h).max(), 1e-300)


def _random_in(basis: Sequence[np.ndarray], rng: np.random.Generator) -> np.ndarray:
    if not basis:
        raise DegenerateSample("cannot sample from an empty basis")
    coeffs = rng.standard_normal(len(basis)) + 1j * rng.standard_normal(len(basis))
    return sum(c * b for c, b in zip(coeffs, basis))


def _eigen_clusters(h: np.ndarray) -> List[np.ndarray]:
    """Orthonormal eigenspace bases of a Hermitian matrix, merging gaps below threshold"""
    evals, evecs = eig_hermitian(h)
    clusters, start = [], 0
    for i in range(1, len(evals) + 1):
        if i == len(evals) or evals[i] - evals[i - 1] > settings.DEGENERACY_GAP:
            clusters.append(evecs[:, start:i])
            start = i
    return clusters


def _decompose_once(
    d: int,
    algebra: Sequence[np.ndarray],
    commutant: Sequence[np.ndarray],
    rng: np.random.Generator,
) -> SubalgebraStructure:
    center = _center_basis(algebra)
    central_spaces = _eigen_clusters(_random_hermitian_in(center, rng))
    if len(central_spaces) != len(center):
        raise DegenerateSample(
            "central element split fewer blocks than the center dimension",
            found=len(central_spaces), expected=len(center),
        )

    pieces = []
    for space in central_spaces:
        rank = space.shape[1]
        local = _random_hermitian_in([space.conj().T @ c @ space for c in commutant], rng)
        copies = _eigen_clusters(local)
        m = len(copies)
        n = rank // m
        if m * n != rank or any(c.shape[1] != n for c in copies):
            raise DegenerateSample("multiplicity spaces have unequal dimension", rank=rank, copies=m)
        # copies[i] are coordinates inside `space`; lift them to ambient vectors
        lifted = [space @ c for c in copies]
        mixer = _random_in(commutant, rng)
        aligned = [lifted[0]]
        for w in lifted[1:]:
            link = w.conj().T @ mixer @ lifted[0]
            scale = np.sqrt(np.real(np.trace(link.conj().T @ link)) / n)
            if scale < 1e-6:
                raise DegenerateSample("multiplicity spaces are not linked by the sample")
            aligned.append(w @ (link / scale))
        vectors = np.hstack(aligned)
        pieces.append(((m, n), vectors.conj().T))

    d_total = sum(m * n for (m, n), _ in pieces)
    if d_total != d:
        raise DegenerateSample("blocks do not cover the space", covered=d_total, dim=d)
    if sum(n * n for (_, n), _ in pieces) != len(algebra) or sum(m * m for (m, _), _ in pieces) != len(commutant):
        raise DegenerateSample("block dimensions disagree with the algebra dimension")

    structure = assemble_structure_rows(d, pieces)
    worst = max(membership_residual(structure, a) / max(np.abs(a).max(), 1e-300) for a in algebra)
    if worst > 1e-8:
        raise DegenerateSample("decomposed basis does not block-diagonalize the algebra", residual=f"{worst:.2e}")
    return structure


def assemble_structure_rows(d: int, pieces) -> SubalgebraStructure:
    """Orthonormalize the stacked rows by polar decomposition, then sort blocks"""
    stacked = np.vstack([rows for _, rows in pieces])
    unitary, _ = scipy.linalg.polar(stacked)
    repaired, pos = [], 0
    for block, rows in pieces:
        repaired.append((block, unitary[pos:pos + rows.shape[0]]))
        pos += rows.shape[0]
    return assemble_structure(d, repaired)


def decompose_from_generators(
    gens: Sequence[np.ndarray],
    d: Optional[int] = None,
    mode: str = "algebra",
    seed: Optional[int] = None,
) -> SubalgebraStructure:
    """Canonical block structure of the algebra generated by gens, or of their commutant

    Args:
        gens: Generators, all d×d
        d: Ambient dimension (required when gens is empty)
        mode: "algebra" for the unital *-algebra generated by gens,
            "commutant" for {x : gx = xg for all g}
            Without generators both modes return the full algebra B(C^d)
        seed: Seed for the random central and commutant samples

    Returns:
        SubalgebraStructure whose basis unitary block-diagonalizes the algebra
    """
    gens = [np.asarray(g, dtype=complex) for g in gens]
    if d is None:
        if not gens:
            raise DimensionMismatch("dimension is required without generators")
        d = gens[0].shape[0]
    if any(g.shape != (d, d) for g in gens):
        raise DimensionMismatch("generators must all be d×d", d=d)
    if mode not in ("algebra", "commutant"):
        raise ValueError(f"unknown decomposition mode {mode}")
    if not gens:
        logger.info(f"No generators given: full algebra on C^{d}")
        return make_full(d)

    if mode == "algebra":
        closed = gens + [g.conj().T for g in gens]
        commutant = commutant_basis(closed, d)
        algebra = commutant_basis(commutant, d)
    else:
        algebra = commutant_basis(gens, d)
        for b in algebra:
            if _span_residual(algebra, b.conj().T) > 1e-8:
                raise NotClosedUnderStar("commutant of the generators is not *-closed")
        commutant = commutant_basis(algebra, d)

    logger.info(f"Decomposing {mode} of {len(gens)} generators: dim A = {len(algebra)}, dim A' = {len(commutant)}")
    rng = np.random.default_rng(settings.SEED if seed is None else seed)
    for attempt in range(settings.DECOMPOSE_RETRIES):
        try:
            structure = _decompose_once(d, algebra, commutant, rng)
            logger.info(f"Decomposition found blocks {structure.blocks} after {attempt + 1} sample(s)")
            return structure
        except DegenerateSample as exc:
            logger.debug(f"Decomposition attempt {attempt + 1} degenerate: {exc}")
    raise DegenerateSample("no non-degenerate sample found", retries=settings.DECOMPOSE_RETRIES)
