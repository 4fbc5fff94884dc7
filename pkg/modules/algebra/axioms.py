"""Sample-level checks that S(N^⊗n) behaves as a family of free states"""
import logging
from typing import Optional

import numpy as np

from config.config import settings
from modules.algebra.algebra_service import (
    membership_residual,
    random_state_in,
    tensor_power,
)
from modules.algebra.schema import AxiomCheck, AxiomsReport, SubalgebraStructure
from modules.exceptions import DimensionTooLarge
from modules.linops import kron, kron_power, partial_trace, permute_subsystems

logger = logging.getLogger(__name__)

_MEMBERSHIP_TOL = 1e-9


def _record(check: AxiomCheck, residual: float) -> None:
    check.max_deviation = max(check.max_deviation, residual)
    if residual > _MEMBERSHIP_TOL:
        check.violations += 1


def axioms_check(
    N: SubalgebraStructure,
    n_max: int,
    samples: int = 20,
    seed: Optional[int] = None,
) -> AxiomsReport:
    """Verify the free-state axioms on sampled states of S(N^⊗n), n = 1..n_max

    Checked per n: convexity, containment of σ^⊗n for full-rank σ ∈ S(N),
    closure under partial traces, tensor products and permutations of the
    copies. Violations are reported, never raised.
    """
    d = N.ambient_dim
    if d ** n_max > settings.MAX_DIM:
        raise DimensionTooLarge("axiom check exceeds dimension guard", dim=d ** n_max, limit=settings.MAX_DIM)
    rng = np.random.default_rng(settings.SEED if seed is None else seed)
    report = AxiomsReport(blocks=N.blocks, n_max=n_max)
    powers = {k: tensor_power(N, k) for k in range(1, n_max + 1)}

    for n in range(1, n_max + 1):
        Nn = powers[n]
        dims = [d] * n
        convex = AxiomCheck(axiom=1, name="convexity", n=n, samples=samples)
        product = AxiomCheck(axiom=2, name="iid free states", n=n, samples=samples)
        reduction = AxiomCheck(axiom=3, name="partial trace", n=n, samples=samples if n > 1 else 0)
        tensor = AxiomCheck(axiom=4, name="tensor product", n=n, samples=samples if n > 1 else 0)
        symmetry = AxiomCheck(axiom=5, name="permutation", n=n, samples=samples)

        for _ in range(samples):
            rho = random_state_in(Nn, rng)
            other = random_state_in(Nn, rng, full_rank=False)
            t = rng.uniform()
            _record(convex, membership_residual(Nn, t * rho + (1 - t) * other))

            sigma = random_state_in(N, rng, full_rank=True)
            _record(product, membership_residual(Nn, kron_power(sigma, n)))

            perm = list(rng.permutation(n))
            _record(symmetry, membership_residual(Nn, permute_subsystems(rho, dims, perm)))

            if n > 1:
                k = int(rng.integers(n))
                keep = [i for i in range(n) if i != k]
                _record(reduction, membership_residual(powers[n - 1], partial_trace(rho, dims, keep)))

                split = int(rng.integers(1, n))
                left = random_state_in(powers[split], rng)
                right = random_state_in(powers[n - split], rng)
                _record(tensor, membership_residual(Nn, kron(left, right)))

        report.checks.extend([convex, product, reduction, tensor, symmetry])
        logger.info(
            f"Axioms at n={n}: "
            + ", ".join(f"{c.name}={'ok' if c.passed else 'FAIL'}" for c in (convex, product, reduction, tensor, symmetry))
        )
    return report
