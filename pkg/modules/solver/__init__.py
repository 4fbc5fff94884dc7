"""Certified convex solvers for subalgebra divergences."""

from modules.solver.pair_divergences import (
    supported,
    relative_entropy,
    dmax_pair,
    fidelity_divergence,
    renyi_pair,
    neyman_pearson,
)
from modules.solver.subalgebra_solvers import (
    dmax_subalgebra,
    dh_subalgebra,
    dmin_subalgebra,
    renyi_subalgebra,
)
from modules.solver.smoothing import (
    smooth_dmax_subalgebra,
    smooth_dmax_pair,
    smooth_dmin_subalgebra,
)
from modules.solver.verify import verify
from modules.solver.schema import (
    SolverOptions,
    SolverCertificate,
    LocalSearchReport,
    CertificateCheck,
)

__all__ = [
    'supported',
    'relative_entropy',
    'dmax_pair',
    'fidelity_divergence',
    'renyi_pair',
    'neyman_pearson',
    'dmax_subalgebra',
    'dh_subalgebra',
    'dmin_subalgebra',
    'renyi_subalgebra',
    'smooth_dmax_subalgebra',
    'smooth_dmax_pair',
    'smooth_dmin_subalgebra',
    'verify',
    'SolverOptions',
    'SolverCertificate',
    'LocalSearchReport',
    'CertificateCheck',
]
