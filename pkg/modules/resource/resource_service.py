"""MIO/DIO predicates and the dilution channels that realize the one-shot cost bounds"""
import logging
import math
from typing import Literal, Optional, Sequence, Tuple

import cvxpy as cp
import numpy as np

from config.config import settings
from modules.algebra import (
    SubalgebraStructure,
    conditional_expectation,
    from_canonical,
    make_diagonal,
    membership_residual,
    pimsner_popa_index,
    random_state_in,
    to_canonical,
)
from modules.dilation import kraus_operators
from modules.entropy import DEFAULT_ALPHAS, subalgebra_relative_entropy
from modules.exceptions import ConstructionFailed, DimensionMismatch, PreconditionViolated
from modules.linops import hermitize, log2, partial_trace, root_fidelity
from modules.resource.schema import (
    CHANNEL_TOL,
    ChannelCheck,
    CostBracket,
    DilutionResult,
    MonotonicityReport,
    MonotonicityRow,
    QuantumChannel,
)
from modules.solver import SolverOptions, dmax_pair, renyi_subalgebra, smooth_dmax_subalgebra
from modules.solver.sdp import expectation_expr, fidelity_ball, hermitian_psd, min_eig, psd_part, solve, value_of
from modules.solver.subalgebra_solvers import check_epsilon, prepare_state

logger = logging.getLogger(__name__)

_SPOT_SAMPLES = 20
_LAMBDA_SLACK = 1e-6


def _matrix_units(d: int):
    for i in range(d):
        for j in range(d):
            unit = np.zeros((d, d), dtype=complex)
            unit[i, j] = 1.0
            yield unit


def _check_dims(channel: QuantumChannel, M: SubalgebraStructure, N: SubalgebraStructure) -> None:
    if channel.dim_in != M.ambient_dim or channel.dim_out != N.ambient_dim:
        raise DimensionMismatch(
            "channel dimensions do not match the algebras",
            channel=(channel.dim_in, channel.dim_out),
            algebras=(M.ambient_dim, N.ambient_dim),
        )


def mio_deviation(channel: QuantumChannel, M: SubalgebraStructure, N: SubalgebraStructure) -> float:
    """max over matrix units of ‖Φ(E_M(E_ij)) − E_N(Φ(E_M(E_ij)))‖_F"""
    _check_dims(channel, M, N)
    worst = 0.0
    for unit in _matrix_units(M.ambient_dim):
        out = channel.apply(conditional_expectation(M, unit))
        worst = max(worst, float(np.linalg.norm(out - conditional_expectation(N, out))))
    return worst


def dio_deviation(channel: QuantumChannel, M: SubalgebraStructure, N: SubalgebraStructure) -> float:
    """max over matrix units of ‖Φ(E_M(E_ij)) − E_N(Φ(E_ij))‖_F"""
    _check_dims(channel, M, N)
    worst = 0.0
    for unit in _matrix_units(M.ambient_dim):
        left = channel.apply(conditional_expectation(M, unit))
        right = conditional_expectation(N, channel.apply(unit))
        worst = max(worst, float(np.linalg.norm(left - right)))
    return worst


def is_mio(
    channel: QuantumChannel, M: SubalgebraStructure, N: SubalgebraStructure, tol: float = CHANNEL_TOL
) -> bool:
    """Φ ∘ E_M = E_N ∘ Φ ∘ E_M, spot-checked as Φ(S(M)) ⊆ S(N)"""
    if mio_deviation(channel, M, N) > tol:
        return False
    rng = np.random.default_rng(settings.SEED)
    for _ in range(_SPOT_SAMPLES):
        image = channel.apply(random_state_in(M, rng))
        if membership_residual(N, image) > tol * M.ambient_dim:
            logger.warning("MIO superoperator check passed but a sampled free state left S(N)")
            return False
    return True


def is_dio(
    channel: QuantumChannel, M: SubalgebraStructure, N: SubalgebraStructure, tol: float = CHANNEL_TOL
) -> bool:
    """Φ ∘ E_M = E_N ∘ Φ"""
    return dio_deviation(channel, M, N) <= tol


def maximally_coherent_source(n: int) -> Tuple[SubalgebraStructure, np.ndarray]:
    """Diagonal algebra on C^n and its flat state (1/n) Σᵢⱼ |i⟩⟨j|"""
    if n < 1:
        raise DimensionMismatch("source dimension must be at least 1", n=n)
    return make_diagonal(n), np.full((n, n), 1.0 / n, dtype=complex)


def expectation_channel(N: SubalgebraStructure) -> QuantumChannel:
    """E_N as a channel on B(H), Kraus operators taken from its Stinespring dilation"""
    d = N.ambient_dim
    return QuantumChannel(dim_in=d, dim_out=d, kraus=kraus_operators(N))


def _normalized(m) -> np.ndarray:
    m = psd_part(hermitize(m))
    return m / float(np.real(np.trace(m)))


def _dilution_channel(rho_prime: np.ndarray, sigma: np.ndarray, n: int) -> QuantumChannel:
    """x ↦ n/(n−1)(1 − tr(e x))(σ − ρ'/n) + tr(e x) ρ', or preparation of σ when n = 1"""
    if n == 1:
        return QuantumChannel.preparation(1, sigma)
    e_t = np.full((n, n), 1.0 / n, dtype=complex)
    choi = np.kron(e_t, rho_prime) + n / (n - 1) * np.kron(np.eye(n) - e_t, sigma - rho_prime / n)
    return QuantumChannel.from_choi(choi, n, rho_prime.shape[0])


def channel_check(
    channel: QuantumChannel,
    rho_prime: np.ndarray,
    N: SubalgebraStructure,
    operation_class: Literal["MIO", "DIO"],
) -> ChannelCheck:
    """Choi positivity, trace preservation, Φ(e_M) = ρ' and the class predicate"""
    M, e_m = maximally_coherent_source(channel.dim_in)
    choi = channel.choi()
    dims = [channel.dim_in, channel.dim_out]
    deviation = mio_deviation if operation_class == "MIO" else dio_deviation
    return ChannelCheck(
        choi_min_eigenvalue=min_eig(choi),
        trace_preservation=float(np.abs(partial_trace(choi, dims, [0]) - np.eye(channel.dim_in)).max()),
        target_deviation=float(np.abs(channel.apply(e_m) - rho_prime).max()),
        class_deviation=deviation(channel, M, N),
    )


def _require_domination(n: int, sigma: np.ndarray, rho_prime: np.ndarray, what: str) -> None:
    if n < 1:
        raise PreconditionViolated("source dimension must be at least 1", n=n)
    gap = min_eig(n * sigma - rho_prime)
    if gap < -1e-9:
        raise PreconditionViolated(f"{what} does not dominate the target", n=n, min_eigenvalue=f"{gap:.3e}")


def build_mio_dilution(rho_prime, sigma, n: int, N: SubalgebraStructure) -> QuantumChannel:
    """MIO channel from the diagonal source on C^n with Φ(e_M) = ρ'

    Args:
        rho_prime: Target state on the ambient space of N
        sigma: Free state of N with n·σ ⪰ ρ'
        n: Source dimension
        N: Target algebra

    Raises:
        PreconditionViolated: if σ ∉ S(N) or n·σ ⪰ ρ' fails
        ConstructionFailed: if the built channel fails its predicate battery
    """
    rho_prime, sigma = _normalized(rho_prime), _normalized(sigma)
    if membership_residual(N, sigma) > 1e-9:
        raise PreconditionViolated("σ is not in the target algebra", residual=membership_residual(N, sigma))
    _require_domination(n, sigma, rho_prime, "n·σ")
    channel = _dilution_channel(rho_prime, sigma, n)
    check = channel_check(channel, rho_prime if n > 1 else sigma, N, "MIO")
    if not check.passed or not is_mio(channel, maximally_coherent_source(n)[0], N):
        raise ConstructionFailed("MIO dilution channel failed verification", **check.model_dump())
    logger.debug(f"MIO dilution channel on C^{n} verified")
    return channel


def build_dio_dilution(rho_prime, N: SubalgebraStructure, n: int) -> QuantumChannel:
    """DIO channel from the diagonal source on C^n with Φ(e_M) = ρ', built around E_N(ρ')

    Raises:
        PreconditionViolated: if ρ' ⪯ n·E_N(ρ') fails
        ConstructionFailed: if the built channel fails its predicate battery
    """
    rho_prime = _normalized(rho_prime)
    sigma = conditional_expectation(N, rho_prime)
    _require_domination(n, sigma, rho_prime, "n·E_N(ρ')")
    channel = _dilution_channel(rho_prime, sigma, n)
    check = channel_check(channel, rho_prime if n > 1 else sigma, N, "DIO")
    if not check.passed:
        raise ConstructionFailed("DIO dilution channel failed verification", **check.model_dump())
    logger.debug(f"DIO dilution channel on C^{n} verified")
    return channel


def dmax_pinned(rho, N: SubalgebraStructure) -> float:
    """D_max(ρ‖E_N(ρ))"""
    rho = prepare_state(rho, N)
    return dmax_pair(rho, conditional_expectation(N, rho))


def _pinned_feasible(rc: np.ndarray, N: SubalgebraStructure, eps: float, lam: float, opts: SolverOptions):
    """max s with λ·E_N(ρ') − ρ' ⪰ s·1 over normalized ρ' in the ε-ball"""
    d = rc.shape[0]
    rho_prime, ball = fidelity_ball(rc, eps)
    s = cp.Variable()
    _, dominance = hermitian_psd(lam * expectation_expr(N, rho_prime) - rho_prime - s * np.eye(d), d)
    problem = cp.Problem(cp.Maximize(s), ball + dominance + [cp.real(cp.trace(rho_prime)) == 1])
    solve(problem, opts, f"pinned D_max feasibility at λ = {lam:.6f}")
    return float(s.value) >= -opts.tol, value_of(rho_prime)


def dmax_pinned_eps(
    rho, N: SubalgebraStructure, eps: float, opts: Optional[SolverOptions] = None
) -> Tuple[float, np.ndarray]:
    """min over normalized ρ' in the ε-ball of D_max(ρ'‖E_N(ρ'))

    For fixed λ the condition ρ' ⪯ λ·E_N(ρ') is linear in ρ', so λ is
    bisected between 1 and 2^{D_max(ρ‖E_N(ρ))}.

    Returns:
        Value in bits and the optimizer ρ'
    """
    check_epsilon(eps)
    opts = opts or SolverOptions()
    rho = prepare_state(rho, N)
    hi = 2 ** dmax_pinned(rho, N)
    if eps == 0 or hi <= 1 + opts.tol:
        return log2(hi), rho
    rc = to_canonical(N, rho)
    feasible, best = _pinned_feasible(rc, N, eps, 1.0, opts)
    if feasible:
        logger.info(f"D_max,E^{eps}: a free state lies in the ball")
        return 0.0, _normalized(from_canonical(N, best))
    lo, best = 1.0, rc
    steps = 0
    while hi - lo > opts.tol * hi and steps < opts.max_iter:
        mid = (lo + hi) / 2
        feasible, candidate = _pinned_feasible(rc, N, eps, mid, opts)
        if feasible:
            hi, best = mid, candidate
        else:
            lo = mid
        steps += 1
    value = log2(hi)
    logger.info(f"D_max,E^{eps}(ρ) = {value:.8f} bits after {steps} bisection steps")
    return value, _normalized(from_canonical(N, best))


def _witness(
    operation_class: Literal["MIO", "DIO"],
    channel: QuantumChannel,
    rho: np.ndarray,
    target: np.ndarray,
    N: SubalgebraStructure,
    n: int,
) -> DilutionResult:
    source, e_m = maximally_coherent_source(n)
    prepared = channel.apply(e_m)
    return DilutionResult(
        operation_class=operation_class,
        source=source,
        channel=channel,
        target=target,
        n=n,
        fidelity_achieved=min(1.0, root_fidelity(rho, prepared)),
        check=channel_check(channel, target, N, operation_class),
        asymptotic_cost=subalgebra_relative_entropy(rho, N),
    )


def one_shot_cost_bracket(
    rho, N: SubalgebraStructure, eps: float, opts: Optional[SolverOptions] = None
) -> CostBracket:
    """D_max^ε(ρ‖N) ≤ one-shot MIO cost ≤ log₂ n for an explicit dilution channel

    The smoothing optimizer ρ' (trace c) and its dominating X ∈ N give
    τ = X/tr X ∈ S(N) and the completed target ρ̂ = ρ' + (1 − c)·τ ⪯ (tr X + 1 − c)·τ.
    The source dimension is n = ⌈2^{D_max(ρ̂‖τ)}⌉, or n = 1 with τ prepared
    directly when tr X ≤ 1.
    """
    check_epsilon(eps)
    opts = opts or SolverOptions()
    rho = prepare_state(rho, N)
    lower, cert, rho_prime = smooth_dmax_subalgebra(rho, N, eps, opts)
    big_x = hermitize(cert.primal["X"])
    mass = float(np.real(np.trace(big_x)))
    tau = big_x / mass

    if mass <= 1 + opts.tol:
        n, target, sigma = 1, tau, tau
    else:
        c = float(np.real(np.trace(rho_prime)))
        target = _normalized(rho_prime + max(0.0, 1 - c) * tau)
        lam = 2 ** dmax_pair(target, tau)
        n = max(1, math.ceil(lam - _LAMBDA_SLACK))
        sigma = tau
        if n == 1:
            target = tau
        elif min_eig(n * sigma - target) < -1e-9:
            if pimsner_popa_index(N).inverse <= n:
                logger.warning(f"n·τ misses the target by rounding; using E_N(ρ̂) as the free state at n = {n}")
                sigma = conditional_expectation(N, target)
            else:
                logger.warning(f"n·τ misses the target by rounding; raising n to {n + 1}")
                n += 1

    channel = build_mio_dilution(target, sigma, n, N)
    witness = _witness("MIO", channel, rho, target if n > 1 else sigma, N, n)
    bracket = CostBracket(epsilon=eps, lower=lower, upper=log2(n), witness=witness)
    logger.info(f"MIO cost bracket at ε = {eps}: [{bracket.lower:.6f}, {bracket.upper:.6f}] with n = {n}")
    if not bracket.fidelity_ok:
        logger.warning(f"witness fidelity {witness.fidelity_achieved:.8f} is below 1 − ε")
    return bracket


def dio_cost_bracket(
    rho, N: SubalgebraStructure, eps: float, opts: Optional[SolverOptions] = None
) -> CostBracket:
    """D_max,E^ε(ρ) ≤ one-shot DIO cost ≤ log₂ n for an explicit dephasing-covariant channel"""
    check_epsilon(eps)
    opts = opts or SolverOptions()
    rho = prepare_state(rho, N)
    lower, rho_prime = dmax_pinned_eps(rho, N, eps, opts)
    lam = 2 ** dmax_pinned(rho_prime, N)
    n = max(1, math.ceil(lam - _LAMBDA_SLACK))
    target = rho_prime
    if n == 1:
        target = conditional_expectation(N, rho_prime)
    elif min_eig(n * conditional_expectation(N, rho_prime) - rho_prime) < -1e-9:
        # mixing towards E_N(ρ') leaves E_N unchanged and lowers the ratio to exactly n
        delta = (lam - n) / (lam - 1)
        mixed = (1 - delta) * rho_prime + delta * conditional_expectation(N, rho_prime)
        if root_fidelity(rho, mixed) >= 1 - eps - 1e-6:
            target = mixed
        else:
            logger.warning(f"mixing leaves the ε-ball; raising n to {n + 1}")
            n += 1

    channel = build_dio_dilution(target, N, n)
    witness = _witness("DIO", channel, rho, _normalized(target), N, n)
    bracket = CostBracket(epsilon=eps, lower=lower, upper=log2(n), witness=witness)
    logger.info(f"DIO cost bracket at ε = {eps}: [{bracket.lower:.6f}, {bracket.upper:.6f}] with n = {n}")
    return bracket


def monotonicity_check(
    channel: QuantumChannel,
    M: SubalgebraStructure,
    N: SubalgebraStructure,
    rho,
    alphas: Sequence[float] = DEFAULT_ALPHAS,
    opts: Optional[SolverOptions] = None,
) -> MonotonicityReport:
    """D_α(Φ(ρ)‖N) ≤ D_α(ρ‖M) for an M–N MIO channel"""
    _check_dims(channel, M, N)
    opts = opts or SolverOptions()
    rho = prepare_state(rho, M)
    image = _normalized(channel.apply(rho))
    report = MonotonicityReport()
    for alpha in alphas:
        before, _ = renyi_subalgebra(rho, M, alpha, opts)
        after, _ = renyi_subalgebra(image, N, alpha, opts)
        row = MonotonicityRow(alpha=alpha, before=before, after=after, slack=max(1e-5, 20 * opts.tol))
        if not row.passed:
            logger.warning(f"D_{alpha} increased under the channel: {before:.8f} -> {after:.8f}")
        report.rows.append(row)
    return report
