"""Independent re-verification of solver certificates in numpy"""
import logging
import math

import numpy as np

from modules.algebra import block_compressions, conditional_expectation, membership_residual
from modules.linops import root_fidelity
from modules.solver.schema import CertificateCheck, SolverCertificate
from modules.solver.sdp import max_eig, min_eig

logger = logging.getLogger(__name__)


def _neg(x: float) -> float:
    return max(0.0, -x)


def _trace(m: np.ndarray) -> float:
    return float(np.real(np.trace(m)))


def _free_state_residual(N, sigma: np.ndarray) -> float:
    return max(membership_residual(N, sigma), _neg(min_eig(sigma)), abs(_trace(sigma) - 1))


def _check_dmax(cert: SolverCertificate):
    N, rho = cert.structure, cert.data["rho"]
    x, y = cert.primal["X"], cert.dual["Y"]
    primal = max(membership_residual(N, x), _neg(min_eig(x - rho)))
    dual = max(_neg(min_eig(y)), _neg(1 - max_eig(conditional_expectation(N, y))))
    return primal, dual, _trace(x) - _trace(y @ rho)


def _check_smooth_dmax(cert: SolverCertificate):
    N, rho = cert.structure, cert.data["rho"]
    x, rho_prime = cert.primal["X"], cert.primal["rho_prime"]
    floor = math.sqrt(1 - cert.epsilon ** 2)
    if N is not None:
        in_target = membership_residual(N, x)
        normalization = _neg(1 - max_eig(conditional_expectation(N, cert.dual["Y"])))
    else:
        sigma = cert.data["sigma"]
        in_target = float(np.abs(x - _trace(x) / _trace(sigma) * sigma).max())
        normalization = _neg(1 - _trace(cert.dual["Y"] @ sigma))
    primal = max(
        in_target,
        _neg(min_eig(x - rho_prime)),
        _neg(min_eig(rho_prime)),
        _neg(1 - _trace(rho_prime)),
        _neg(root_fidelity(rho, rho_prime) - floor),
    )
    y, w11 = cert.dual["Y"], cert.dual["W11"]
    mu, nu = cert.dual["mu"], cert.dual["nu"]
    eye = np.eye(rho.shape[0])
    block = np.block([[w11, -nu / 2 * eye], [-nu / 2 * eye, y + mu * eye]])
    dual = max(_neg(min_eig(y)), _neg(min_eig(block)), _neg(mu), _neg(nu), normalization)
    d_obj = nu * floor - mu - _trace(w11 @ rho)
    return primal, dual, _trace(x) - d_obj


def _check_dh(cert: SolverCertificate):
    N, rho, eps = cert.structure, cert.data["rho"], cert.epsilon
    q, t = cert.primal["Q"], cert.primal["t"]
    eye = np.eye(rho.shape[0])
    worst = max(max_eig(a) for a in block_compressions(N, q))
    primal = max(
        _neg(min_eig(q)),
        _neg(min_eig(eye - q)),
        _neg(_trace(q @ rho) - (1 - eps)),
        _neg(t - worst),
    )
    sigma, z, mu = cert.dual["sigma"], cert.dual["Z"], cert.dual["mu"]
    dual = max(
        _free_state_residual(N, sigma),
        _neg(min_eig(z)),
        _neg(mu),
        _neg(min_eig(sigma + z - mu * rho)),
    )
    return primal, dual, t - (mu * (1 - eps) - _trace(z))


def _check_dmin(cert: SolverCertificate):
    N, rho = cert.structure, cert.data["rho"]
    sigma = cert.primal["sigma"]
    w11, w22, kappa = cert.dual["W11"], cert.dual["W22"], cert.dual["kappa"]
    half = 0.5 * np.eye(rho.shape[0])
    primal = _free_state_residual(N, sigma)
    dual = max(
        _neg(min_eig(np.block([[w11, -half], [-half, w22]]))),
        _neg(kappa - max_eig(conditional_expectation(N, w22))),
    )
    return primal, dual, _trace(w11 @ rho) + kappa - root_fidelity(rho, sigma)


_CHECKS = {
    "dmax_subalgebra": _check_dmax,
    "dmax_subalgebra_smooth": _check_smooth_dmax,
    "dmax_pair_smooth": _check_smooth_dmax,
    "dh_subalgebra": _check_dh,
    "dmin_subalgebra": _check_dmin,
}


def verify(cert: SolverCertificate) -> CertificateCheck:
    """Recompute feasibility residuals and the duality gap of a certificate

    Negative gaps (weak duality violated) count as failures through their
    absolute value.
    """
    primal, dual, gap = _CHECKS[cert.kind](cert)
    check = CertificateCheck(kind=cert.kind, primal_residual=primal, dual_residual=dual, gap=abs(gap), tol=cert.tol)
    if not check.passed:
        logger.warning(
            f"Certificate {cert.kind} failed verification: primal {primal:.2e}, dual {dual:.2e}, gap {gap:.2e}"
        )
    return check
