"""Divergences between two fixed operators: closed forms and the Neyman–Pearson test"""
import logging
import math
from typing import Tuple

import numpy as np

from modules.exceptions import DimensionMismatch, InvalidEpsilon
from modules.linops import (
    as_array,
    eig_hermitian,
    log2,
    matrix_log2,
    matrix_power,
    support_projection,
    trace_norm,
)

logger = logging.getLogger(__name__)

_SUPPORT_LEAK = 1e-9


def _pair(rho, sigma) -> Tuple[np.ndarray, np.ndarray]:
    r, s = as_array(rho), as_array(sigma)
    if r.shape != s.shape:
        raise DimensionMismatch("divergence arguments differ in shape", left=r.shape, right=s.shape)
    return r, s


def supported(rho: np.ndarray, sigma: np.ndarray) -> bool:
    """supp ρ ⊆ supp σ, up to a trace leak of 1e-9"""
    r, s = _pair(rho, sigma)
    outside = np.eye(s.shape[0]) - support_projection(s)
    return float(np.real(np.trace(outside @ r))) <= _SUPPORT_LEAK * max(1.0, float(np.real(np.trace(r))))


def relative_entropy(rho, sigma) -> float:
    """Umegaki relative entropy tr ρ(log₂ ρ − log₂ σ), +∞ when the support condition fails"""
    r, s = _pair(rho, sigma)
    if not supported(r, s):
        return math.inf
    return float(np.real(np.trace(r @ (matrix_log2(r) - matrix_log2(s)))))


def dmax_pair(rho, sigma) -> float:
    """log₂ λ_max(σ^{-1/2} ρ σ^{-1/2}) on the support of σ"""
    r, s = _pair(rho, sigma)
    if not supported(r, s):
        return math.inf
    inv_sqrt = matrix_power(s, -0.5)
    return log2(float(eig_hermitian(inv_sqrt @ r @ inv_sqrt)[0][-1]))


def fidelity_divergence(rho, sigma) -> float:
    """−2 log₂ tr|√ρ√σ|"""
    r, s = _pair(rho, sigma)
    return -2 * log2(trace_norm(matrix_power(r, 0.5) @ matrix_power(s, 0.5)))


def renyi_pair(rho, sigma, alpha: float) -> float:
    """Sandwiched Rényi divergence (1/(α−1)) log₂ tr[(σ^γ ρ σ^γ)^α], γ = (1−α)/2α

    α = 1/2 gives −2 log₂ tr|√ρ√σ|, α = 1 the Umegaki relative entropy and
    α = ∞ the max-divergence. For α > 1 the value is +∞ unless supp ρ ⊆ supp σ.
    """
    if alpha < 0.5:
        raise ValueError(f"alpha must be at least 1/2, got {alpha}")
    r, s = _pair(rho, sigma)
    if math.isinf(alpha):
        return dmax_pair(r, s)
    if alpha == 1:
        return relative_entropy(r, s)
    if alpha == 0.5:
        return fidelity_divergence(r, s)
    if alpha > 1 and not supported(r, s):
        return math.inf
    gamma = (1 - alpha) / (2 * alpha)
    power = matrix_power(s, gamma)
    sandwiched = power @ r @ power
    evals = np.clip(eig_hermitian(sandwiched)[0], 0.0, None)
    q = float(np.sum(evals ** alpha))
    if q <= 0:
        return math.inf
    return math.log2(q) / (alpha - 1)


def _positive_parts(rho: np.ndarray, sigma: np.ndarray, t: float, band: float):
    """Projections onto eigenvalues of ρ − tσ above band and within ±band"""
    evals, evecs = eig_hermitian(rho - t * sigma)
    above = evecs[:, evals > band]
    level = evecs[:, np.abs(evals) <= band]
    return above @ above.conj().T, level @ level.conj().T


def neyman_pearson(rho, sigma, eps: float) -> Tuple[float, np.ndarray]:
    """Optimal test for min tr(Qσ) subject to tr(Qρ) ≥ 1 − ε

    The optimizer is Q = P_{>0}(ρ − tσ) + γ·P_{=0}(ρ − tσ) at the critical
    multiplier t, with γ fixing tr(Qρ) = 1 − ε.

    Returns:
        The minimal type-II error β and the test Q; D_H^ε = −log₂ β
    """
    if not 0 <= eps < 1:
        raise InvalidEpsilon("type-I error must lie in [0, 1)", eps=eps)
    r, s = _pair(rho, sigma)
    target = (1 - eps) * float(np.real(np.trace(r)))
    d = r.shape[0]

    kernel = np.eye(d) - support_projection(s)
    leak = float(np.real(np.trace(kernel @ r)))
    if leak >= target:
        gamma = target / leak
        logger.debug("Neyman-Pearson: test on ker σ reaches the constraint, β = 0")
        return 0.0, gamma * kernel

    scale = max(float(eig_hermitian(r)[0][-1]), 1e-300)
    band0 = 1e-12 * scale

    def accepted(t: float) -> float:
        above, _ = _positive_parts(r, s, t, band0)
        return float(np.real(np.trace(above @ r)))

    lo, hi = 0.0, 1.0
    slack = 1e-13 * max(1.0, target)
    if eps == 0 or accepted(0.0) <= target + slack:
        hi = 0.0
    else:
        while accepted(hi) > target + slack:
            lo, hi = hi, 2 * hi
            if hi > 1e15:
                break
        for _ in range(200):
            if hi - lo <= 1e-14 * max(1.0, hi):
                break
            mid = (lo + hi) / 2
            if accepted(mid) > target + slack:
                lo = mid
            else:
                hi = mid

    s_norm = max(float(eig_hermitian(s)[0][-1]), 1e-300)
    band = band0 + 2 * (hi - lo) * s_norm
    above, level = _positive_parts(r, s, hi, band)
    taken = float(np.real(np.trace(above @ r)))
    weight = float(np.real(np.trace(level @ r)))
    gamma = 0.0 if weight <= 0 else min(1.0, max(0.0, (target - taken) / weight))
    q = above + gamma * level
    beta = float(np.real(np.trace(q @ s)))
    logger.debug(f"Neyman-Pearson: t = {hi:.12g}, γ = {gamma:.6f}, β = {beta:.12g}")
    return beta, q
