"""Divergences against a subalgebra: D_max, D_H^ε, D_min and the sandwiched Rényi family

Every semidefinite program is solved twice, once as the primal and once as
the dual, in the canonical coordinates of N. The returned certificate holds
numpy points that are exactly feasible after a final repair step, so the
reported gap is a rigorous bracket on the optimum.
"""
import logging
import math
from typing import List, Optional, Tuple

import cvxpy as cp
import numpy as np
import scipy.optimize

from config.config import settings
from modules.algebra import (
    SubalgebraStructure,
    block_compressions,
    conditional_expectation,
    embed_blocks,
    from_canonical,
    state_grid,
    supports_state_grid,
    to_canonical,
)
from modules.exceptions import DimensionMismatch, InvalidEpsilon, NonConvergence
from modules.linops import as_array, hermitize, log2, matrix_power, trace_norm
from modules.solver.pair_divergences import relative_entropy, renyi_pair
from modules.solver.schema import SolverCertificate, SolverOptions
from modules.solver.sdp import (
    algebra_variable,
    embed_expr,
    hermitian_psd,
    max_eig,
    min_eig,
    multiplicity_trace,
    psd_part,
    solve,
    trace_weights,
    value_of,
)

logger = logging.getLogger(__name__)


def prepare_state(rho, N: SubalgebraStructure) -> np.ndarray:
    r = hermitize(as_array(rho))
    if r.shape != (N.ambient_dim, N.ambient_dim):
        raise DimensionMismatch("state does not act on the ambient space", shape=r.shape, dim=N.ambient_dim)
    return r


def check_epsilon(eps: float) -> None:
    if not 0 <= eps < 1:
        raise InvalidEpsilon("smoothing parameter must lie in [0, 1)", eps=eps)


def dmax_subalgebra(
    rho, N: SubalgebraStructure, opts: Optional[SolverOptions] = None
) -> Tuple[float, SolverCertificate]:
    """D_max(ρ‖N) = log₂ min{tr X : X ∈ N, X ⪰ ρ}

    Dual: max tr(Yρ) over Y ⪰ 0 with E_N(Y) = 1.

    Returns:
        Value in bits and the certificate (primal X, dual Y)
    """
    opts = opts or SolverOptions()
    rho = prepare_state(rho, N)
    d = N.ambient_dim
    rc = to_canonical(N, rho)

    parts, x = algebra_variable(N)
    _, dominance = hermitian_psd(x - rc, d)
    primal = cp.Problem(cp.Minimize(trace_weights(N, parts)), dominance)
    iterations = solve(primal, opts, "D_max primal")

    y = cp.Variable((d, d), hermitian=True)
    unital = [t == m * np.eye(n) for (m, n), t in zip(N.blocks, multiplicity_trace(N, y))]
    dual = cp.Problem(cp.Maximize(cp.real(cp.trace(y @ rc))), [y >> 0] + unital)
    iterations += solve(dual, opts, "D_max dual")

    big_x = embed_blocks(N, [value_of(p) for p in parts])
    big_x = (big_x + big_x.conj().T) / 2
    big_x = big_x + max(0.0, -min_eig(big_x - rho)) * np.eye(d)
    big_y = psd_part(from_canonical(N, value_of(y)))
    scale = max_eig(conditional_expectation(N, big_y))
    if scale > 0:
        big_y = big_y / scale

    p_obj = float(np.real(np.trace(big_x)))
    d_obj = float(np.real(np.trace(big_y @ rho)))
    value = log2(p_obj)
    logger.info(f"D_max(ρ‖N) = {value:.8f} bits (gap {p_obj - d_obj:.2e})")
    cert = SolverCertificate(
        kind="dmax_subalgebra",
        value=value,
        primal_objective=p_obj,
        dual_objective=d_obj,
        primal={"X": big_x},
        dual={"Y": big_y},
        data={"rho": rho},
        structure=N,
        gap=abs(p_obj - d_obj),
        iterations=iterations,
        tol=opts.tol,
    )
    return value, cert


def dh_subalgebra(
    rho, N: SubalgebraStructure, eps: float, opts: Optional[SolverOptions] = None
) -> Tuple[float, SolverCertificate]:
    """Composite hypothesis-testing divergence D_H^ε(ρ‖N)

    Solves min t over tests 0 ⪯ Q ⪯ 1 with tr(Qρ) ≥ 1 − ε and
    A_k(Q) ⪯ t·1 for every block compression A_k. The dual variables
    Y_k assemble the worst-case free state σ = ⊕ 1_m ⊗ Y_k/m.

    Returns:
        −log₂ t in bits and the certificate (test Q, worst-case σ)
    """
    check_epsilon(eps)
    opts = opts or SolverOptions()
    rho = prepare_state(rho, N)
    d = N.ambient_dim
    rc = to_canonical(N, rho)
    eye = np.eye(d)

    q = cp.Variable((d, d), hermitian=True)
    t = cp.Variable()
    _, below_one = hermitian_psd(eye - q, d)
    constraints = [q >> 0, cp.real(cp.trace(q @ rc)) >= 1 - eps] + below_one
    for (m, n), traced in zip(N.blocks, multiplicity_trace(N, q)):
        _, bound = hermitian_psd(t * np.eye(n) - traced / m, n)
        constraints += bound
    primal = cp.Problem(cp.Minimize(t), constraints)
    iterations = solve(primal, opts, "D_H primal")

    ys = [cp.Variable((n, n), hermitian=True) for _, n in N.blocks]
    z = cp.Variable((d, d), hermitian=True)
    mu = cp.Variable(nonneg=True)
    sigma_expr = embed_expr(N, [y / m for (m, _), y in zip(N.blocks, ys)])
    _, residual = hermitian_psd(sigma_expr + z - mu * rc, d)
    constraints = [y >> 0 for y in ys] + [z >> 0, sum(cp.real(cp.trace(y)) for y in ys) == 1] + residual
    dual = cp.Problem(cp.Maximize(mu * (1 - eps) - cp.real(cp.trace(z))), constraints)
    iterations += solve(dual, opts, "D_H dual")

    test = from_canonical(N, value_of(q))
    test = eye - psd_part(eye - psd_part(test))
    t_obj = max(max_eig(a) for a in block_compressions(N, test))

    y_vals = [psd_part(value_of(y)) for y in ys]
    total = sum(float(np.real(np.trace(y))) for y in y_vals)
    y_vals = [y / total for y in y_vals]
    sigma = embed_blocks(N, [y / m for (m, _), y in zip(N.blocks, y_vals)])
    mu_val = max(0.0, float(mu.value))
    slack = psd_part(from_canonical(N, value_of(z)))
    shift = max(0.0, -min_eig(sigma + slack - mu_val * rho))
    slack = slack + shift * eye
    d_obj = mu_val * (1 - eps) - float(np.real(np.trace(slack)))

    value = -log2(t_obj)
    logger.info(f"D_H^{eps}(ρ‖N) = {value:.8f} bits (gap {t_obj - d_obj:.2e})")
    cert = SolverCertificate(
        kind="dh_subalgebra",
        value=value,
        primal_objective=t_obj,
        dual_objective=d_obj,
        primal={"Q": test, "t": t_obj},
        dual={"sigma": sigma, "Z": slack, "mu": mu_val, "Y": y_vals},
        data={"rho": rho},
        structure=N,
        epsilon=eps,
        gap=abs(t_obj - d_obj),
        iterations=iterations,
        tol=opts.tol,
    )
    return value, cert


def dmin_subalgebra(
    rho, N: SubalgebraStructure, opts: Optional[SolverOptions] = None
) -> Tuple[float, SolverCertificate]:
    """D_min(ρ‖N) = −2 log₂ max_{σ∈S(N)} tr|√ρ√σ|

    Primal: max Re tr Z with [[ρ, Z], [Z*, σ]] ⪰ 0. Dual: min tr(W₁₁ρ) + κ
    with [[W₁₁, −1/2], [−1/2, W₂₂]] ⪰ 0 and E_N(W₂₂) ⪯ κ·1. The dual point
    is feasible for every ρ, so tr(W₁₁ρ') + κ bounds the fidelity at any ρ'.
    ρ may be a substate.
    """
    opts = opts or SolverOptions()
    rho = prepare_state(rho, N)
    d = N.ambient_dim
    rc = to_canonical(N, rho)
    half = 0.5 * np.eye(d)

    parts, sigma_expr = algebra_variable(N)
    z = cp.Variable((d, d), complex=True)
    _, block = hermitian_psd(cp.bmat([[rc, z], [z.H, sigma_expr]]), 2 * d)
    primal = cp.Problem(cp.Maximize(cp.real(cp.trace(z))), block + [trace_weights(N, parts) == 1])
    iterations = solve(primal, opts, "D_min primal")

    w11 = cp.Variable((d, d), hermitian=True)
    w22 = cp.Variable((d, d), hermitian=True)
    kappa = cp.Variable()
    _, block = hermitian_psd(cp.bmat([[w11, -half], [-half, w22]]), 2 * d)
    constraints = list(block)
    for (m, n), traced in zip(N.blocks, multiplicity_trace(N, w22)):
        _, bound = hermitian_psd(kappa * np.eye(n) - traced / m, n)
        constraints += bound
    dual = cp.Problem(cp.Minimize(cp.real(cp.trace(w11 @ rc)) + kappa), constraints)
    iterations += solve(dual, opts, "D_min dual")

    sigma_parts = [psd_part(value_of(p)) for p in parts]
    sigma = embed_blocks(N, sigma_parts)
    sigma = sigma / float(np.real(np.trace(sigma)))
    fidelity = trace_norm(matrix_power(rho, 0.5) @ matrix_power(sigma, 0.5))

    upper_left = from_canonical(N, value_of(w11))
    lower_right = from_canonical(N, value_of(w22))
    upper_left, lower_right = (upper_left + upper_left.conj().T) / 2, (lower_right + lower_right.conj().T) / 2
    shift = max(0.0, -min_eig(np.block([[upper_left, -half], [-half, lower_right]])))
    upper_left = upper_left + shift * np.eye(d)
    lower_right = lower_right + shift * np.eye(d)
    kappa_val = max_eig(conditional_expectation(N, lower_right))
    d_obj = float(np.real(np.trace(upper_left @ rho))) + kappa_val

    value = -2 * log2(fidelity)
    logger.info(f"D_min(ρ‖N) = {value:.8f} bits (gap {d_obj - fidelity:.2e})")
    cert = SolverCertificate(
        kind="dmin_subalgebra",
        value=value,
        primal_objective=fidelity,
        dual_objective=d_obj,
        primal={"sigma": sigma},
        dual={"W11": upper_left, "W22": lower_right, "kappa": kappa_val},
        data={"rho": rho},
        structure=N,
        gap=abs(d_obj - fidelity),
        iterations=iterations,
        tol=opts.tol,
    )
    return value, cert


def _state_from_params(N: SubalgebraStructure, theta: np.ndarray) -> np.ndarray:
    parts, pos = [], 0
    for _, n in N.blocks:
        size = n * n
        g = theta[pos:pos + size] + 1j * theta[pos + size:pos + 2 * size]
        g = g.reshape(n, n)
        parts.append(g @ g.conj().T)
        pos += 2 * size
    sigma = embed_blocks(N, parts)
    return sigma / max(float(np.real(np.trace(sigma))), 1e-300)


def _params_from_state(N: SubalgebraStructure, sigma: np.ndarray) -> np.ndarray:
    chunks = []
    for a in block_compressions(N, sigma):
        g = matrix_power(a + 1e-9 * np.eye(a.shape[0]), 0.5).reshape(-1)
        chunks.extend([g.real, g.imag])
    return np.concatenate(chunks)


def _grid_minimum(rho: np.ndarray, N: SubalgebraStructure, alpha: float) -> Tuple[float, np.ndarray]:
    best, best_sigma = math.inf, None
    for sigma in state_grid(N, settings.GRID_POINTS):
        value = renyi_pair(rho, sigma, alpha)
        if value < best:
            best, best_sigma = value, sigma
    return best, best_sigma


def renyi_subalgebra(
    rho, N: SubalgebraStructure, alpha: float, opts: Optional[SolverOptions] = None
) -> Tuple[float, np.ndarray]:
    """D_α(ρ‖N) = inf over σ ∈ S(N) of the sandwiched Rényi divergence

    α = 1 evaluates D(ρ‖E_N(ρ)), α = 1/2 and α = ∞ use the certified SDPs.
    Other orders run multi-start L-BFGS-B over block factors G_k with
    σ ∝ ⊕ 1_m ⊗ G_k G_k*, starting from E_N(ρ). When S(N) is a segment the
    grid minimum is compared and wins if lower.

    Returns:
        Value in bits and the minimizing free state
    """
    if alpha < 0.5:
        raise ValueError(f"alpha must be at least 1/2, got {alpha}")
    opts = opts or SolverOptions()
    rho = prepare_state(rho, N)
    if alpha == 1:
        sigma = conditional_expectation(N, rho)
        return relative_entropy(rho, sigma), sigma
    if math.isinf(alpha):
        value, cert = dmax_subalgebra(rho, N, opts)
        big_x = cert.primal["X"]
        return value, big_x / float(np.real(np.trace(big_x)))
    if alpha == 0.5:
        value, cert = dmin_subalgebra(rho, N, opts)
        return value, cert.primal["sigma"]

    rng = opts.rng()

    def objective(theta: np.ndarray) -> float:
        value = renyi_pair(rho, _state_from_params(N, theta), alpha)
        return value if math.isfinite(value) else 1e6

    start = _params_from_state(N, conditional_expectation(N, rho))
    starts = [start] + [rng.standard_normal(start.size) for _ in range(opts.multi_start - 1)]
    results: List[Tuple[float, np.ndarray]] = []
    for k, x0 in enumerate(starts):
        res = scipy.optimize.minimize(
            objective, x0, method="L-BFGS-B",
            options={"maxiter": opts.max_iter, "ftol": 1e-15, "gtol": 1e-10},
        )
        results.append((float(res.fun), res.x))
        logger.debug(f"D_{alpha} start {k}: {res.fun:.10f} after {res.nit} iterations")
    values = [v for v, _ in results]
    best_value, best_theta = min(results, key=lambda item: item[0])
    if best_value >= 1e6:
        raise NonConvergence("no start reached a finite divergence", alpha=alpha)
    spread = max(values) - min(values)
    if spread > 1e-5:
        logger.debug(f"D_{alpha} starts spread by {spread:.2e}")
    sigma = _state_from_params(N, best_theta)

    if supports_state_grid(N):
        grid_value, grid_sigma = _grid_minimum(rho, N, alpha)
        if grid_value < best_value - opts.tol:
            logger.warning(
                f"D_{alpha}: grid minimum {grid_value:.8f} below local search {best_value:.8f}; using grid"
            )
            best_value, sigma = grid_value, grid_sigma
    logger.info(f"D_{alpha}(ρ‖N) = {best_value:.8f} bits")
    return best_value, sigma
