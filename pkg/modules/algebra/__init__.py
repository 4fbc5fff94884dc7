"""Finite-dimensional subalgebras, conditional expectations and their index."""

from modules.algebra.algebra_service import (
    assemble_structure,
    make_full,
    make_diagonal,
    make_trivial,
    make_tensor_factor,
    to_canonical,
    from_canonical,
    block_compressions,
    embed_blocks,
    conditional_expectation,
    membership_residual,
    membership,
    expectation_choi,
    random_element,
    random_state_in,
    pimsner_popa_index,
    index_projection,
    flat_index_state,
    index_by_sdp,
    tensor_product,
    tensor_power,
    supports_state_grid,
    state_grid,
)
from modules.algebra.decomposition import commutant_basis, decompose_from_generators
from modules.algebra.axioms import axioms_check
from modules.algebra.schema import (
    SubalgebraStructure,
    SubalgebraPayload,
    GeneratorPayload,
    PimsnerPopaIndex,
    AxiomCheck,
    AxiomsReport,
)

__all__ = [
    'assemble_structure',
    'make_full',
    'make_diagonal',
    'make_trivial',
    'make_tensor_factor',
    'to_canonical',
    'from_canonical',
    'block_compressions',
    'embed_blocks',
    'conditional_expectation',
    'membership_residual',
    'membership',
    'expectation_choi',
    'random_element',
    'random_state_in',
    'pimsner_popa_index',
    'index_projection',
    'flat_index_state',
    'index_by_sdp',
    'tensor_product',
    'tensor_power',
    'supports_state_grid',
    'state_grid',
    'commutant_basis',
    'decompose_from_generators',
    'axioms_check',
    'SubalgebraStructure',
    'SubalgebraPayload',
    'GeneratorPayload',
    'PimsnerPopaIndex',
    'AxiomCheck',
    'AxiomsReport',
]
