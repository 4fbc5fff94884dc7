"""Dense linear-algebra foundation for states and operators."""

from modules.linops.linops_service import (
    as_array,
    log2,
    hermitize,
    eig_hermitian,
    matrix_power,
    matrix_log2,
    support_projection,
    kron,
    kron_power,
    partial_trace,
    permute_subsystems,
    permutation_matrix,
    trace_norm,
    operator_norm,
    root_fidelity,
    purified_distance,
    von_neumann_entropy,
    min_entropy,
    is_psd,
    random_unitary,
    random_pure_state,
    random_density,
    random_hermitian,
    ket,
    projector,
)
from modules.linops.schema import (
    MatrixPayload,
    DensityPayload,
    DensityOperator,
    Projection,
)

__all__ = [
    'as_array',
    'log2',
    'hermitize',
    'eig_hermitian',
    'matrix_power',
    'matrix_log2',
    'support_projection',
    'kron',
    'kron_power',
    'partial_trace',
    'permute_subsystems',
    'permutation_matrix',
    'trace_norm',
    'operator_norm',
    'root_fidelity',
    'purified_distance',
    'von_neumann_entropy',
    'min_entropy',
    'is_psd',
    'random_unitary',
    'random_pure_state',
    'random_density',
    'random_hermitian',
    'ket',
    'projector',
    'MatrixPayload',
    'DensityPayload',
    'DensityOperator',
    'Projection',
]
