"""Entropies relative to subalgebras, conditional entropies and the checks that tie them together"""
import logging
import math
from typing import List, Literal, Optional, Sequence, Tuple

import numpy as np

from config.config import settings
from modules.algebra import (
    SubalgebraStructure,
    conditional_expectation,
    flat_index_state,
    make_tensor_factor,
    pimsner_popa_index,
    tensor_power,
)
from modules.dilation import build_xi, dilate_state, purify, stinespring
from modules.entropy.schema import (
    AepReport,
    AepRow,
    BoundCheck,
    DualityReport,
    DualityRow,
    EntropyReport,
    MaximalDivergenceReport,
    MaximalDivergenceRow,
    Quantity,
    SteinRow,
)
from modules.exceptions import DimensionMismatch, DimensionTooLarge, InvalidEpsilon
from modules.linops import as_array, kron_power, log2, partial_trace, von_neumann_entropy
from modules.solver import (
    SolverOptions,
    dh_subalgebra,
    dmax_subalgebra,
    dmin_subalgebra,
    neyman_pearson,
    relative_entropy,
    renyi_subalgebra,
    smooth_dmax_pair,
    smooth_dmax_subalgebra,
    smooth_dmin_subalgebra,
)
from modules.solver.subalgebra_solvers import check_epsilon, prepare_state

logger = logging.getLogger(__name__)

ConditionalKind = Literal["H", "Hmin", "Hmax", "Halpha"]

DEFAULT_ALPHAS: Tuple[float, ...] = (0.5, 2 / 3, 1.0, 2.0, math.inf)


def subalgebra_relative_entropy(rho, N: SubalgebraStructure) -> float:
    """D(ρ‖N) = D(ρ‖E_N(ρ)) in bits"""
    rho = prepare_state(rho, N)
    return relative_entropy(rho, conditional_expectation(N, rho))


def conjugate_alpha(alpha: float) -> float:
    """β with 1/α + 1/β = 2; α = 1/2 pairs with ∞ and α = 1 with itself"""
    if alpha < 0.5:
        raise ValueError(f"alpha must be at least 1/2, got {alpha}")
    if math.isinf(alpha):
        return 0.5
    inverse = 2 - 1 / alpha
    return math.inf if inverse <= 0 else 1 / inverse


def conditional_entropy(
    rho_ab,
    dims: Sequence[int],
    kind: ConditionalKind = "H",
    eps: float = 0.0,
    alpha: Optional[float] = None,
    opts: Optional[SolverOptions] = None,
) -> float:
    """Conditional entropy of A given B, in bits

    Every kind is computed as log₂ d_A minus the matching divergence
    against the subalgebra 1_A ⊗ B(H_B). The smoothed max-entropy is taken
    from a purification |ψ⟩_ABC as −H_min^ε(A|C).

    Args:
        rho_ab: State on H_A ⊗ H_B
        dims: (d_A, d_B)
        kind: "H", "Hmin", "Hmax" or "Halpha"
        eps: Smoothing parameter for Hmin and Hmax
        alpha: Rényi order for Halpha
        opts: Solver options

    Returns:
        Value in bits
    """
    d_a, d_b = (int(x) for x in dims)
    rho = as_array(rho_ab)
    if rho.shape != (d_a * d_b, d_a * d_b):
        raise DimensionMismatch("state does not act on H_A ⊗ H_B", shape=rho.shape, dims=(d_a, d_b))
    check_epsilon(eps)
    opts = opts or SolverOptions()
    N = make_tensor_factor(d_a, d_b, keep_first=False)

    if kind == "H":
        return von_neumann_entropy(rho) - von_neumann_entropy(partial_trace(rho, [d_a, d_b], [1]))
    if kind == "Hmin":
        return log2(d_a) - smooth_dmax_subalgebra(rho, N, eps, opts)[0]
    if kind == "Halpha":
        if alpha is None:
            raise ValueError("Halpha needs an order alpha")
        return log2(d_a) - renyi_subalgebra(rho, N, alpha, opts)[0]
    if kind == "Hmax":
        if eps == 0:
            return log2(d_a) - dmin_subalgebra(rho, N, opts)[0]
        psi, d_c = purify(rho)
        rho_ac = partial_trace(np.outer(psi, psi.conj()), [d_a, d_b, d_c], [0, 2])
        return -conditional_entropy(rho_ac, (d_a, d_c), "Hmin", eps, opts=opts)
    raise ValueError(f"unknown conditional entropy kind {kind!r}")


def evaluate(
    rho,
    N: SubalgebraStructure,
    quantity: Quantity,
    eps: float = 0.0,
    alpha: Optional[float] = None,
    opts: Optional[SolverOptions] = None,
) -> EntropyReport:
    """Compute one divergence of ρ against N and wrap it in a report"""
    opts = opts or SolverOptions()
    cert = None
    if quantity == Quantity.D:
        value = subalgebra_relative_entropy(rho, N)
    elif quantity == Quantity.D_ALPHA:
        if alpha is None:
            raise ValueError("D_alpha needs an order alpha")
        value, _ = renyi_subalgebra(rho, N, alpha, opts)
    elif quantity == Quantity.DMAX:
        value, cert = dmax_subalgebra(rho, N, opts)
    elif quantity == Quantity.DMIN:
        value, cert = dmin_subalgebra(rho, N, opts)
    elif quantity == Quantity.DMAX_EPS:
        value, cert, _ = smooth_dmax_subalgebra(rho, N, eps, opts)
    elif quantity == Quantity.DMIN_EPS:
        value, _, _ = smooth_dmin_subalgebra(rho, N, eps, opts)
    elif quantity == Quantity.DH:
        value, cert = dh_subalgebra(rho, N, eps, opts)
    else:
        raise ValueError(f"{quantity.value} is a conditional entropy; use conditional_entropy")
    return EntropyReport(quantity=quantity, value=value, epsilon=eps, alpha=alpha, certificate=cert)


def _row_tol(opts: SolverOptions, local: bool) -> float:
    return max(1e-4 if local else 1e-5, 20 * opts.tol)


def duality_check(
    rho,
    N: SubalgebraStructure,
    eps: float = 0.0,
    alphas: Sequence[float] = DEFAULT_ALPHAS,
    opts: Optional[SolverOptions] = None,
) -> DualityReport:
    """Compare each divergence with the conditional entropy of the dilated state

    With ω = VρV* on H_E ⊗ H_A, D_max^ε(ρ‖N) = −H_min^ε(E|A)_ω,
    D_min^ε(ρ‖N) = −H_max^ε(E|A)_ω and D_α(ρ‖N) = −H_α(E|A)_ω.
    D_min^ε rows with ε > 0 rely on local search on the direct side and
    are compared with a looser tolerance.
    """
    opts = opts or SolverOptions()
    rho = prepare_state(rho, N)
    V = stinespring(N)
    if V.dim_env * V.dim_in > settings.MAX_DIM:
        raise DimensionTooLarge("dilated space exceeds dimension guard", dim=V.dim_env * V.dim_in)
    omega = dilate_state(V, rho)
    dims = (V.dim_env, V.dim_in)
    logger.info(f"Duality check: d = {V.dim_in}, d_E = {V.dim_env}, ε = {eps}")

    dmax_value, dmax_cert, _ = smooth_dmax_subalgebra(rho, N, eps, opts)
    rows: List[DualityRow] = [
        DualityRow(
            quantity=Quantity.DMAX_EPS if eps > 0 else Quantity.DMAX,
            epsilon=eps,
            direct=dmax_value,
            certificate_gap=dmax_cert.gap,
            dilated=-conditional_entropy(omega, dims, "Hmin", eps, opts=opts),
            tol=_row_tol(opts, False),
        ),
        DualityRow(
            quantity=Quantity.DMIN_EPS if eps > 0 else Quantity.DMIN,
            epsilon=eps,
            direct=smooth_dmin_subalgebra(rho, N, eps, opts)[0],
            dilated=-conditional_entropy(omega, dims, "Hmax", eps, opts=opts),
            tol=_row_tol(opts, eps > 0),
            local_search=eps > 0,
        ),
    ]
    for alpha in alphas:
        rows.append(DualityRow(
            quantity=Quantity.D if alpha == 1 else Quantity.D_ALPHA,
            alpha=alpha,
            direct=renyi_subalgebra(rho, N, alpha, opts)[0],
            dilated=-conditional_entropy(omega, dims, "Halpha", alpha=alpha, opts=opts),
            tol=_row_tol(opts, False),
        ))
    report = DualityReport(kind="dilation", rows=rows)
    for row in report.rows:
        if not row.passed:
            logger.warning(
                f"Duality row {row.quantity.value} (α={row.alpha}, ε={row.epsilon}) differs by {row.difference:.2e}"
            )
    return report


def triple_duality_check(
    rho,
    N: SubalgebraStructure,
    eps: float = 0.0,
    alphas: Sequence[float] = DEFAULT_ALPHAS,
    opts: Optional[SolverOptions] = None,
) -> DualityReport:
    """Compare each divergence with the dual conditional entropy of ξ_EF

    ξ = (V ⊗ 1_F)|ψ⟩ purifies the dilated state, so D_max^ε(ρ‖N) = H_max^ε(E|F)_ξ,
    D_min^ε(ρ‖N) = H_min^ε(E|F)_ξ and D_α(ρ‖N) = H_β(E|F)_ξ with 1/α + 1/β = 2.
    """
    opts = opts or SolverOptions()
    rho = prepare_state(rho, N)
    V = stinespring(N)
    xi = build_xi(V, rho)
    d_e, _, d_f = xi.dims
    if int(np.prod(xi.dims)) > settings.MAX_DIM:
        raise DimensionTooLarge("purified dilation exceeds dimension guard", dims=xi.dims)
    xi_ef = xi.marginal([0, 2])
    dims = (d_e, d_f)
    logger.info(f"Triple duality check: dims (E, A, F) = {xi.dims}, ε = {eps}")

    dmax_value, dmax_cert, _ = smooth_dmax_subalgebra(rho, N, eps, opts)
    rows: List[DualityRow] = [
        DualityRow(
            quantity=Quantity.DMAX_EPS if eps > 0 else Quantity.DMAX,
            epsilon=eps,
            direct=dmax_value,
            certificate_gap=dmax_cert.gap,
            dilated=conditional_entropy(xi_ef, dims, "Hmax", eps, opts=opts),
            tol=_row_tol(opts, False),
        ),
        DualityRow(
            quantity=Quantity.DMIN_EPS if eps > 0 else Quantity.DMIN,
            epsilon=eps,
            direct=smooth_dmin_subalgebra(rho, N, eps, opts)[0],
            dilated=conditional_entropy(xi_ef, dims, "Hmin", eps, opts=opts),
            tol=_row_tol(opts, eps > 0),
            local_search=eps > 0,
        ),
    ]
    for alpha in alphas:
        beta = conjugate_alpha(alpha)
        rows.append(DualityRow(
            quantity=Quantity.D if alpha == 1 else Quantity.D_ALPHA,
            alpha=alpha,
            conjugate_alpha=beta,
            direct=renyi_subalgebra(rho, N, alpha, opts)[0],
            dilated=conditional_entropy(xi_ef, dims, "Halpha", alpha=beta, opts=opts),
            tol=_row_tol(opts, False),
        ))
    report = DualityReport(kind="triple", rows=rows)
    for row in report.rows:
        if not row.passed:
            logger.warning(
                f"Triple duality row {row.quantity.value} (α={row.alpha}, ε={row.epsilon}) "
                f"differs by {row.difference:.2e}"
            )
    return report


def _power_state(rho: np.ndarray, n: int) -> np.ndarray:
    if rho.shape[0] ** n > settings.MAX_DIM:
        raise DimensionTooLarge("tensor power exceeds dimension guard", dim=rho.shape[0] ** n)
    return kron_power(rho, n)


def aep_trace(
    rho,
    N: SubalgebraStructure,
    eps: float,
    n_max: int,
    opts: Optional[SolverOptions] = None,
) -> AepReport:
    """Per-copy smoothed divergences of ρ^⊗n against N^⊗n for n = 1..n_max

    Each row also holds the values against the fixed product state
    E_N(ρ)^⊗n, which upper-bound the subalgebra values.
    ε = 0 gives the unsmoothed divergences.
    """
    check_epsilon(eps)
    opts = opts or SolverOptions()
    rho = prepare_state(rho, N)
    sigma = conditional_expectation(N, rho)
    rate = relative_entropy(rho, sigma)
    report = AepReport(epsilon=eps)
    for n in range(1, n_max + 1):
        big_n = tensor_power(N, n)
        rho_n = _power_state(rho, n)
        sigma_n = kron_power(sigma, n)
        dmax = smooth_dmax_subalgebra(rho_n, big_n, eps, opts)[0]
        dmin = smooth_dmin_subalgebra(rho_n, big_n, eps, opts)[0]
        dh = dh_subalgebra(rho_n, big_n, eps, opts)[0]
        dmax_fixed = smooth_dmax_pair(rho_n, sigma_n, eps, opts)[0]
        beta, _ = neyman_pearson(rho_n, sigma_n, eps)
        dh_fixed = -log2(beta) if beta > 0 else math.inf
        row = AepRow(
            n=n,
            dmax_eps=dmax / n,
            dmin_eps=dmin / n,
            dh_eps=dh / n,
            relative_entropy=rate,
            dmax_fixed=dmax_fixed / n,
            dh_fixed=dh_fixed / n,
            slack=max(1e-5, 20 * opts.tol),
        )
        logger.info(
            f"AEP n={n}: D_max^ε/n {row.dmax_eps:.6f}, D_min^ε/n {row.dmin_eps:.6f}, "
            f"D_H^ε/n {row.dh_eps:.6f}, D {rate:.6f}"
        )
        if not row.passed:
            logger.warning(f"AEP n={n}: subalgebra value exceeds the fixed-state bound")
        report.rows.append(row)
    if eps > 0 and not report.gap_shrinks:
        logger.warning(f"AEP gap to D did not shrink: {report.gaps[0]:.6f} -> {report.gaps[-1]:.6f}")
    return report


def stein_trace(
    rho,
    N: SubalgebraStructure,
    eps: float,
    n_max: int,
    opts: Optional[SolverOptions] = None,
) -> List[SteinRow]:
    """(1/n) D_H^ε(ρ^⊗n‖N^⊗n) for n = 1..n_max next to D(ρ‖N)"""
    check_epsilon(eps)
    opts = opts or SolverOptions()
    rho = prepare_state(rho, N)
    rate = subalgebra_relative_entropy(rho, N)
    rows = []
    for n in range(1, n_max + 1):
        value, _ = dh_subalgebra(_power_state(rho, n), tensor_power(N, n), eps, opts)
        row = SteinRow(n=n, epsilon=eps, dh_eps=value / n, relative_entropy=rate, slack=max(1e-5, 20 * opts.tol))
        if not row.passed:
            logger.warning(f"Stein n={n}: D_H^ε/n exceeds the weak converse {row.converse_bound:.6f}")
        rows.append(row)
        logger.info(f"Stein n={n}: D_H^ε/n = {value / n:.6f}, D = {rate:.6f}")
    return rows


def hypothesis_testing_bound_check(
    rho, N: SubalgebraStructure, eps: float, opts: Optional[SolverOptions] = None
) -> BoundCheck:
    """D_max^{√(1−ε)}(ρ‖N) ≤ D_H^ε(ρ‖N) + log₂(1/(1−ε)) for ε ∈ (0, 1)"""
    if not 0 < eps < 1:
        raise InvalidEpsilon("the bound needs ε in (0, 1)", eps=eps)
    opts = opts or SolverOptions()
    smooth = smooth_dmax_subalgebra(rho, N, math.sqrt(1 - eps), opts)[0]
    dh = dh_subalgebra(rho, N, eps, opts)[0]
    check = BoundCheck(epsilon=eps, dmax_smooth=smooth, dh=dh)
    if not check.passed:
        logger.warning(f"Hypothesis-testing bound violated at ε = {eps}: slack {check.slack:.2e}")
    return check


def maximal_divergence_check(
    N: SubalgebraStructure,
    alphas: Sequence[float] = DEFAULT_ALPHAS,
    opts: Optional[SolverOptions] = None,
) -> MaximalDivergenceReport:
    """D_α of the flat index state equals log₂ λ⁻¹ for every order"""
    opts = opts or SolverOptions()
    state = flat_index_state(N)
    expected = log2(pimsner_popa_index(N).inverse)
    report = MaximalDivergenceReport()
    for alpha in alphas:
        value, _ = renyi_subalgebra(state, N, alpha, opts)
        report.rows.append(MaximalDivergenceRow(alpha=alpha, value=value, expected=expected))
    return report

