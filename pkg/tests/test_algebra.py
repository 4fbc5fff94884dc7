"""Tests for subalgebra structures, conditional expectations and the index"""
import sys
from pathlib import Path

import numpy as np
import pytest

# Add the parent directory to sys.path
sys.path.insert(0, str(Path(__file__).parent.parent))

from modules.algebra import (
    SubalgebraStructure,
    axioms_check,
    commutant_basis,
    conditional_expectation,
    decompose_from_generators,
    embed_blocks,
    expectation_choi,
    index_by_sdp,
    index_projection,
    make_diagonal,
    make_trivial,
    membership,
    pimsner_popa_index,
    random_element,
    random_state_in,
    state_grid,
    tensor_power,
)
from modules.algebra.decomposition import _center_basis, _random_hermitian_in
from modules.exceptions import DegenerateSample, DimensionTooLarge
from modules.linops import kron, partial_trace, permutation_matrix, random_density
from tests.config import EXACT_TOL
from tests.utils import assert_matrix_close, assert_psd


def test_preset_blocks(diag2, trivial2, factor23, swap_algebra):
    """Preset algebras resolve to their block lists"""
    assert diag2.blocks == [(1, 1), (1, 1)], f"diagonal(2) blocks {diag2.blocks}"
    assert trivial2.blocks == [(2, 1)], f"trivial(2) blocks {trivial2.blocks}"
    assert factor23.blocks == [(3, 2)], f"factor(2,3) blocks {factor23.blocks}"
    assert swap_algebra.blocks == [(3, 1), (1, 1)], f"swap-invariant blocks {swap_algebra.blocks}"


def test_pimsner_popa_index_values(diag3, trivial2, full2, factor23, swap_algebra):
    """λ⁻¹ = Σ m·min(m, n) on the presets"""
    expected = {"diagonal(3)": (diag3, 3), "trivial(2)": (trivial2, 2), "full(2)": (full2, 1),
                "factor(2,3)": (factor23, 6), "swap-invariant": (swap_algebra, 4)}
    for name, (N, inverse) in expected.items():
        index = pimsner_popa_index(N)
        assert index.inverse == inverse, f"{name}: λ⁻¹ = {index.inverse}, expected {inverse}"
    assert str(pimsner_popa_index(factor23).fraction) == "1/6", "factor(2,3) index should be 1/6"


def test_index_oracle_agrees(diag2, diag3, trivial2, factor23, swap_algebra):
    """Variational index search reproduces the formula"""
    for N in (diag2, diag3, trivial2, factor23, swap_algebra):
        value = index_by_sdp(N, seed=7)
        assert abs(value - pimsner_popa_index(N).value) <= 1e-5, f"oracle {value} for blocks {N.blocks}"


def test_pimsner_popa_inequality(factor23, swap_algebra, rng):
    """λ·x ⪯ E_N(x) for random PSD x"""
    for N in (factor23, swap_algebra):
        lam = pimsner_popa_index(N).value
        for _ in range(5):
            x = random_density(N.ambient_dim, rng)
            assert_psd(conditional_expectation(N, x) - lam * x, 1e-9, f"E_N(x) − λx on {N.blocks}")


def test_index_projection_identity(factor23, diag3):
    """E_N(e) = λ·f with e rank one"""
    for N in (factor23, diag3):
        e, f = index_projection(N)
        assert e.rank == 1, f"index projection rank {e.rank}"
        lam = pimsner_popa_index(N).value
        assert_matrix_close(conditional_expectation(N, e.matrix), lam * f.matrix, EXACT_TOL, "E_N(e) vs λf")


def test_dephasing_and_trivial_expectations(diag2, trivial2, mixed_qubit):
    """Diagonal E_N dephases, trivial E_N depolarizes"""
    assert_matrix_close(conditional_expectation(diag2, mixed_qubit), np.diag([0.7, 0.3]), EXACT_TOL, "dephased")
    assert_matrix_close(conditional_expectation(trivial2, mixed_qubit), np.eye(2) / 2, EXACT_TOL, "depolarized")


def test_tensor_factor_expectation(factor23, rng):
    """E onto M_2 ⊗ 1_3 is tr_B(ρ) ⊗ 1/3"""
    rho = random_density(6, rng)
    expected = kron(partial_trace(rho, [2, 3], [0]), np.eye(3) / 3)
    assert_matrix_close(conditional_expectation(factor23, rho), expected, EXACT_TOL, "factor expectation")


def test_expectation_properties(swap_algebra, rng):
    """Idempotent, trace preserving and tr(x·E(y)) = tr(x·y) for x ∈ N"""
    N = swap_algebra
    y = random_density(4, rng)
    ey = conditional_expectation(N, y)
    assert_matrix_close(conditional_expectation(N, ey), ey, EXACT_TOL, "E∘E vs E")
    assert abs(np.trace(ey) - 1) <= EXACT_TOL, "E_N is not trace preserving"
    x = random_element(N, rng)
    assert membership(N, x), "random element left the algebra"
    assert abs(np.trace(x @ y) - np.trace(x @ ey)) <= 1e-9, "tr(xy) = tr(x E(y)) fails"


def test_expectation_choi_is_psd(factor23):
    """E_N is completely positive"""
    assert_psd(expectation_choi(factor23), 1e-9, "Choi matrix of E_N")


def test_random_state_in_algebra(swap_algebra, rng):
    """Sampled free states are normalized members of N"""
    sigma = random_state_in(swap_algebra, rng)
    assert membership(swap_algebra, sigma), "sampled state is not in N"
    assert abs(np.trace(sigma) - 1) <= EXACT_TOL, "sampled state is not normalized"


def test_commutant_decomposition():
    """The commutant of a nondegenerate diagonal matrix is the diagonal algebra"""
    N = decompose_from_generators([np.diag([1.0, 2.0, 3.0])], mode="commutant", seed=3)
    assert N.blocks == [(1, 1)] * 3, f"commutant blocks {N.blocks}"


def test_generated_algebra_of_projection():
    """A rank-one projection on C³ generates C ⊕ C² with multiplicities (1, 2)"""
    N = decompose_from_generators([np.diag([1.0, 0.0, 0.0])], mode="algebra", seed=3)
    assert sorted(N.blocks) == [(1, 1), (2, 1)], f"generated blocks {N.blocks}"


def test_swap_generates_symmetric_and_antisymmetric_blocks():
    """SWAP generates span{1, SWAP}: blocks (3, 1) and (1, 1)"""
    swap = permutation_matrix([2, 2], [1, 0])
    N = decompose_from_generators([swap], mode="algebra", seed=5)
    assert N.blocks == [(3, 1), (1, 1)], f"generated blocks {N.blocks}"
    assert membership(N, swap), "SWAP is not in the decomposed algebra"
    assert pimsner_popa_index(N).inverse == 4, f"λ⁻¹ = {pimsner_popa_index(N).inverse}"


def test_commutative_algebra_keeps_its_center():
    """Commutators that vanish up to rounding still count as zero"""
    swap = permutation_matrix([2, 2], [1, 0])
    commutant = commutant_basis([swap], 4)
    algebra = commutant_basis(commutant, 4)
    assert len(commutant) == 10, f"dim of the commutant {len(commutant)}"
    assert len(algebra) == 2, f"dim of the generated algebra {len(algebra)}"
    assert len(_center_basis(algebra)) == 2, "a commutative algebra is its own center"


def test_sampling_an_empty_basis_is_degenerate(rng):
    with pytest.raises(DegenerateSample):
        _random_hermitian_in([], rng)


def test_generator_scale_does_not_matter():
    swap = permutation_matrix([2, 2], [1, 0])
    N = decompose_from_generators([1e-9 * swap], mode="algebra", seed=5)
    assert N.blocks == [(3, 1), (1, 1)], f"blocks of the rescaled generator {N.blocks}"


def test_empty_generators_give_full_algebra():
    """Without generators both modes return B(C^d)"""
    for mode in ("algebra", "commutant"):
        N = decompose_from_generators([], d=3, mode=mode)
        assert N.blocks == [(1, 3)], f"{mode}: blocks {N.blocks}"


def test_tensor_power_blocks(diag2):
    """diagonal(2)^⊗2 is diagonal(4)"""
    N = tensor_power(diag2, 2)
    assert N.blocks == [(1, 1)] * 4, f"blocks {N.blocks}"
    assert membership(N, np.diag([0.1, 0.2, 0.3, 0.4])), "diagonal matrix is not in the power"


def test_tensor_power_guard(diag2):
    """Powers beyond the dimension guard are refused"""
    with pytest.raises(DimensionTooLarge):
        tensor_power(diag2, 10)


def test_state_grid_stays_in_algebra(diag2):
    """The one-parameter sweep produces free states"""
    states = list(state_grid(diag2, 5))
    assert len(states) == 5, f"expected 5 grid states, got {len(states)}"
    for sigma in states:
        assert membership(diag2, sigma), "grid state left the algebra"


def test_structure_payload_round_trip(factor23):
    """Structure JSON restores blocks and basis"""
    restored = SubalgebraStructure.from_payload(factor23.to_payload())
    assert restored.blocks == factor23.blocks, "blocks changed"
    assert_matrix_close(restored.basis_unitary, factor23.basis_unitary, 0.0, "basis unitary")


def test_structure_validation():
    """Blocks must fill the ambient space"""
    with pytest.raises(ValueError):
        SubalgebraStructure(ambient_dim=3, blocks=[(1, 1)], basis_unitary=np.eye(3))


def test_embed_blocks_of_trivial():
    """Embedding scalar data of the trivial algebra gives a multiple of 1"""
    N = make_trivial(3)
    assert_matrix_close(embed_blocks(N, [np.array([[2.0]])]), 2 * np.eye(3), 0.0, "embedded scalar")


def test_axioms_on_diagonal_powers():
    """Free-state axioms hold for the diagonal family up to n = 2"""
    report = axioms_check(make_diagonal(2), 2, samples=5, seed=11)
    failed = [c.name for c in report.checks if not c.passed]
    assert report.passed, f"axioms failed: {failed}"
