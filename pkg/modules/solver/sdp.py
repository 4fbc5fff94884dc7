"""cvxpy building blocks shared by the semidefinite programs"""
import logging
import math
from typing import List, Sequence, Tuple

import cvxpy as cp
import numpy as np

from modules.algebra import SubalgebraStructure
from modules.exceptions import Infeasible, NonConvergence
from modules.linops import eig_hermitian
from modules.solver.schema import SolverOptions

logger = logging.getLogger(__name__)


def hermitian_psd(expr, dim: int) -> Tuple[cp.Variable, List[cp.Constraint]]:
    """Constrain a square expression to be Hermitian PSD through a Hermitian slack variable"""
    slack = cp.Variable((dim, dim), hermitian=True)
    return slack, [slack == expr, slack >> 0]


def _block_diagonal(items: Sequence, sizes: Sequence[int]):
    rows = []
    for i, item in enumerate(items):
        row = []
        for j, size in enumerate(sizes):
            row.append(item if i == j else np.zeros((sizes[i], size)))
        rows.append(row)
    return cp.bmat(rows)


def algebra_variable(N: SubalgebraStructure) -> Tuple[List[cp.Variable], object]:
    """Block data x_k and the canonical expression ⊕ₖ 1_{m_k} ⊗ x_k"""
    parts = [cp.Variable((n, n), hermitian=True) for _, n in N.blocks]
    return parts, embed_expr(N, parts)


def embed_expr(N: SubalgebraStructure, parts: Sequence):
    items, sizes = [], []
    for (m, n), part in zip(N.blocks, parts):
        items.extend([part] * m)
        sizes.extend([n] * m)
    return _block_diagonal(items, sizes)


def multiplicity_trace(N: SubalgebraStructure, expr) -> List:
    """tr_multiplicity of every diagonal block of a canonical expression"""
    out = []
    for (m, n), o in zip(N.blocks, N.offsets):
        sub = expr[o:o + m * n, o:o + m * n]
        out.append(sub if m == 1 else cp.partial_trace(sub, (m, n), axis=0))
    return out


def expectation_expr(N: SubalgebraStructure, expr):
    """Canonical E_N of a canonical expression"""
    return embed_expr(N, [t / m for (m, _), t in zip(N.blocks, multiplicity_trace(N, expr))])


def trace_weights(N: SubalgebraStructure, parts: Sequence):
    """tr(⊕ 1_m ⊗ x_k) = Σₖ m_k tr x_k"""
    return sum(m * cp.real(cp.trace(x)) for (m, _), x in zip(N.blocks, parts))


def fidelity_ball(rho: np.ndarray, eps: float) -> Tuple[cp.Variable, List[cp.Constraint]]:
    """Substates ρ' with purified distance at most eps from the normalized state rho

    tr|√ρ√ρ'| ≥ √(1 − ε²) is encoded as Re tr Z ≥ √(1 − ε²) with
    [[ρ, Z], [Z*, ρ']] ⪰ 0. For tr ρ = 1 the generalized-fidelity
    correction vanishes.
    """
    d = rho.shape[0]
    rho_prime = cp.Variable((d, d), hermitian=True)
    z = cp.Variable((d, d), complex=True)
    _, block = hermitian_psd(cp.bmat([[rho, z], [z.H, rho_prime]]), 2 * d)
    constraints = block + [
        cp.real(cp.trace(z)) >= math.sqrt(1 - eps ** 2),
        cp.real(cp.trace(rho_prime)) <= 1,
    ]
    return rho_prime, constraints


def solve(problem: cp.Problem, opts: SolverOptions, label: str) -> int:
    """Solve and map solver failures onto toolkit errors

    Returns:
        Iteration count reported by the backend (0 when unavailable)
    """
    kwargs = {}
    if opts.solver.upper() == "CLARABEL":
        kwargs["max_iter"] = opts.max_iter
    elif opts.solver.upper() == "SCS":
        kwargs.update(max_iters=opts.max_iter * 100, eps_abs=opts.tol, eps_rel=opts.tol)
    try:
        problem.solve(solver=opts.solver.upper(), **kwargs)
    except cp.error.SolverError as exc:
        logger.error(f"{label}: backend {opts.solver} failed: {exc}")
        raise NonConvergence(f"{label} failed in the SDP backend", solver=opts.solver) from exc

    status = problem.status
    if status in (cp.INFEASIBLE, cp.INFEASIBLE_INACCURATE):
        raise Infeasible(f"{label} is infeasible", status=status)
    if status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
        logger.error(f"{label}: backend returned status {status}")
        raise NonConvergence(f"{label} did not reach optimality", status=status)
    if status == cp.OPTIMAL_INACCURATE:
        logger.warning(f"{label}: backend reports an inaccurate optimum")
    stats = problem.solver_stats
    iterations = int(stats.num_iters) if stats is not None and stats.num_iters is not None else 0
    logger.debug(f"{label}: status={status}, objective={problem.value:.10g}, iterations={iterations}")
    return iterations


def value_of(var) -> np.ndarray:
    return np.asarray(var.value, dtype=complex)


def psd_part(m: np.ndarray) -> np.ndarray:
    """Positive part of a Hermitian matrix"""
    evals, evecs = eig_hermitian((m + m.conj().T) / 2)
    return (evecs * np.clip(evals, 0.0, None)) @ evecs.conj().T


def min_eig(m: np.ndarray) -> float:
    return float(eig_hermitian((m + m.conj().T) / 2)[0][0])


def max_eig(m: np.ndarray) -> float:
    return float(eig_hermitian((m + m.conj().T) / 2)[0][-1])
