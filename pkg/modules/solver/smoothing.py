"""Smoothed max- and min-divergences over purified-distance balls of substates"""
import logging
import math
from typing import List, Optional, Tuple

import cvxpy as cp
import numpy as np

from modules.algebra import (
    SubalgebraStructure,
    conditional_expectation,
    embed_blocks,
    from_canonical,
    make_full,
    to_canonical,
)
from modules.exceptions import Infeasible
from modules.linops import log2, purified_distance, random_density
from modules.solver.pair_divergences import dmax_pair
from modules.solver.schema import LocalSearchReport, SolverCertificate, SolverOptions
from modules.solver.sdp import (
    algebra_variable,
    fidelity_ball,
    hermitian_psd,
    max_eig,
    min_eig,
    multiplicity_trace,
    psd_part,
    solve,
    trace_weights,
    value_of,
)
from modules.solver.subalgebra_solvers import (
    check_epsilon,
    dmax_subalgebra,
    dmin_subalgebra,
    prepare_state,
)

logger = logging.getLogger(__name__)


def _clean_substate(m: np.ndarray) -> np.ndarray:
    m = psd_part(m)
    tr = float(np.real(np.trace(m)))
    return m / tr if tr > 1 else m


def _smooth_dmax(
    rho: np.ndarray,
    eps: float,
    opts: SolverOptions,
    N: Optional[SubalgebraStructure] = None,
    sigma: Optional[np.ndarray] = None,
) -> Tuple[float, SolverCertificate, np.ndarray]:
    """Shared primal/dual pair for smoothing against N or against a fixed σ"""
    d = rho.shape[0]
    basis = N if N is not None else make_full(d)
    rc = to_canonical(basis, rho)
    sc = None if sigma is None else to_canonical(basis, sigma)
    floor = math.sqrt(1 - eps ** 2)
    label = "smoothed D_max" if N is not None else "smoothed D_max against σ"

    rho_prime, ball = fidelity_ball(rc, eps)
    if N is not None:
        parts, x = algebra_variable(N)
        objective = trace_weights(N, parts)
    else:
        lam = cp.Variable(nonneg=True)
        x = lam * sc
        objective = lam
    _, dominance = hermitian_psd(x - rho_prime, d)
    primal = cp.Problem(cp.Minimize(objective), ball + dominance)
    iterations = solve(primal, opts, f"{label} primal")

    y = cp.Variable((d, d), hermitian=True)
    w11 = cp.Variable((d, d), hermitian=True)
    mu = cp.Variable(nonneg=True)
    nu = cp.Variable(nonneg=True)
    off = -nu / 2 * np.eye(d)
    _, block = hermitian_psd(cp.bmat([[w11, off], [off, y + mu * np.eye(d)]]), 2 * d)
    if N is not None:
        normalization = [t == m * np.eye(n) for (m, n), t in zip(N.blocks, multiplicity_trace(N, y))]
    else:
        normalization = [cp.real(cp.trace(y @ sc)) <= 1]
    dual = cp.Problem(
        cp.Maximize(nu * floor - mu - cp.real(cp.trace(w11 @ rc))),
        [y >> 0] + block + normalization,
    )
    iterations += solve(dual, opts, f"{label} dual")

    smoothed = _clean_substate(from_canonical(basis, value_of(rho_prime)))
    if N is not None:
        big_x = embed_blocks(N, [value_of(p) for p in parts])
        big_x = (big_x + big_x.conj().T) / 2
        big_x = big_x + max(0.0, -min_eig(big_x - smoothed)) * np.eye(d)
    else:
        exact = dmax_pair(smoothed, sigma)
        big_x = (2 ** exact if math.isfinite(exact) else float(lam.value)) * sigma

    big_y = psd_part(from_canonical(basis, value_of(y)))
    scale = max_eig(conditional_expectation(N, big_y)) if N is not None else float(np.real(np.trace(big_y @ sigma)))
    if scale > 0:
        big_y = big_y / scale
    mu_val, nu_val = max(0.0, float(mu.value)), max(0.0, float(nu.value))
    upper_left = from_canonical(basis, value_of(w11))
    upper_left = (upper_left + upper_left.conj().T) / 2
    eye = np.eye(d)
    shift = max(0.0, -min_eig(np.block([
        [upper_left, -nu_val / 2 * eye],
        [-nu_val / 2 * eye, big_y + mu_val * eye],
    ])))
    upper_left = upper_left + shift * eye
    mu_val += shift

    p_obj = float(np.real(np.trace(big_x)))
    d_obj = nu_val * floor - mu_val - float(np.real(np.trace(upper_left @ rho)))
    value = log2(p_obj)
    logger.info(f"{label}: ε = {eps}, value {value:.8f} bits (gap {p_obj - d_obj:.2e})")
    cert = SolverCertificate(
        kind="dmax_subalgebra_smooth" if N is not None else "dmax_pair_smooth",
        value=value,
        primal_objective=p_obj,
        dual_objective=d_obj,
        primal={"X": big_x, "rho_prime": smoothed},
        dual={"Y": big_y, "W11": upper_left, "mu": mu_val, "nu": nu_val},
        data={"rho": rho} if sigma is None else {"rho": rho, "sigma": sigma},
        structure=N,
        epsilon=eps,
        gap=abs(p_obj - d_obj),
        iterations=iterations,
        tol=opts.tol,
    )
    return value, cert, smoothed


def smooth_dmax_subalgebra(
    rho, N: SubalgebraStructure, eps: float, opts: Optional[SolverOptions] = None
) -> Tuple[float, SolverCertificate, np.ndarray]:
    """D_max^ε(ρ‖N): minimize tr X over X ∈ N and substates ρ' ⪯ X in the ε-ball

    Returns:
        Value in bits, certificate, and the smoothing optimizer ρ'
    """
    check_epsilon(eps)
    opts = opts or SolverOptions()
    rho = prepare_state(rho, N)
    if eps == 0:
        value, cert = dmax_subalgebra(rho, N, opts)
        return value, cert, rho
    return _smooth_dmax(rho, eps, opts, N=N)


def smooth_dmax_pair(
    rho, sigma, eps: float, opts: Optional[SolverOptions] = None
) -> Tuple[float, Optional[SolverCertificate], np.ndarray]:
    """D_max^ε(ρ‖σ) against a fixed state σ

    At ε = 0 the closed form is returned without a certificate; an empty
    feasible set gives +∞.
    """
    check_epsilon(eps)
    opts = opts or SolverOptions()
    rho = np.asarray(rho, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    if eps == 0:
        return dmax_pair(rho, sigma), None, rho
    try:
        return _smooth_dmax(rho, eps, opts, sigma=sigma)
    except Infeasible:
        logger.info("smoothed D_max against σ: no substate in the ball is dominated by σ")
        return math.inf, None, rho


def _ball_point(rho: np.ndarray, eps: float, rng: np.random.Generator) -> np.ndarray:
    """Random substate on the segment from ρ towards a random state, inside the ball"""
    tau = random_density(rho.shape[0], rng)
    lo, hi = 0.0, 1.0
    for _ in range(40):
        mid = (lo + hi) / 2
        if purified_distance(rho, (1 - mid) * rho + mid * tau) <= 0.999 * eps:
            lo = mid
        else:
            hi = mid
    return (1 - lo) * rho + lo * tau


def _minimize_linear_over_ball(rho: np.ndarray, weight: np.ndarray, eps: float, opts: SolverOptions) -> np.ndarray:
    rho_prime, ball = fidelity_ball(rho, eps)
    problem = cp.Problem(cp.Minimize(cp.real(cp.trace(weight @ rho_prime))), ball)
    solve(problem, opts, "linearized D_min step")
    return _clean_substate(value_of(rho_prime))


def smooth_dmin_subalgebra(
    rho, N: SubalgebraStructure, eps: float, opts: Optional[SolverOptions] = None
) -> Tuple[float, np.ndarray, LocalSearchReport]:
    """D_min^ε(ρ‖N): maximize D_min(ρ'‖N) over the ε-ball

    The map ρ' ↦ max_σ tr|√ρ'√σ| is concave, and the dual point of the
    fidelity SDP at ρ_k gives a linear majorant tr(W₁₁ρ') + κ. Each step
    minimizes that majorant over the ball, so the fidelity never increases.
    The search runs from ρ and from random points of the ball; values are
    certified lower bounds taken from the dual.

    Returns:
        Best value in bits, its ρ', and the multi-start report
    """
    check_epsilon(eps)
    opts = opts or SolverOptions()
    rho = prepare_state(rho, N)
    if eps == 0:
        value, _ = dmin_subalgebra(rho, N, opts)
        return value, rho, LocalSearchReport(starts=1, values=[value], iterations=[0])

    rng = opts.rng()
    starts = [rho] + [_ball_point(rho, eps, rng) for _ in range(opts.multi_start - 1)]
    report = LocalSearchReport(starts=len(starts))
    best_value, best_state = -math.inf, rho
    for k, current in enumerate(starts):
        previous = math.inf
        steps, stalled = 0, False
        fidelity = math.inf
        while steps < opts.max_iter:
            _, cert = dmin_subalgebra(current, N, opts)
            fidelity = cert.dual_objective
            steps += 1
            if previous - fidelity <= opts.tol:
                stalled = True
                break
            previous = fidelity
            current = _minimize_linear_over_ball(rho, cert.dual["W11"], eps, opts)
        value = -2 * log2(fidelity)
        report.values.append(value)
        report.iterations.append(steps)
        report.converged = report.converged and stalled
        logger.debug(f"D_min^{eps} start {k}: {value:.8f} bits after {steps} steps")
        if value > best_value:
            best_value, best_state = value, current
    report.spread = max(report.values) - min(report.values)
    if not report.converged:
        logger.warning(f"D_min^{eps}: a start hit the iteration cap; reporting the best value found")
    logger.info(f"D_min^{eps}(ρ‖N) = {best_value:.8f} bits (spread {report.spread:.2e})")
    return best_value, best_state, report
