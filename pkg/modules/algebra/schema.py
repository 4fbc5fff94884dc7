from fractions import Fraction
from typing import List, Literal, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from modules.linops.schema import MatrixPayload


def block_sort_key(block: Tuple[int, int]) -> Tuple[int, int]:
    """Blocks are ordered by block dimension, then multiplicity, both descending"""
    m, n = block
    return (-n, -m)


class SubalgebraStructure(BaseModel):
    """Finite-dimensional von Neumann subalgebra ⊕ₖ 1_{m_k} ⊗ M_{n_k}

    basis_unitary maps ambient coordinates to the canonical coordinates, in
    which block k occupies a contiguous range ordered multiplicity-first.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    ambient_dim: int = Field(gt=0)
    blocks: List[Tuple[int, int]]
    basis_unitary: np.ndarray

    @field_validator("blocks")
    @classmethod
    def check_blocks(cls, v: List[Tuple[int, int]]) -> List[Tuple[int, int]]:
        if not v:
            raise ValueError("a subalgebra needs at least one block")
        for m, n in v:
            if m < 1 or n < 1:
                raise ValueError(f"block ({m}, {n}) has a non-positive entry")
        keys = [block_sort_key(b) for b in v]
        if keys != sorted(keys):
            raise ValueError("blocks must be sorted by (n desc, m desc)")
        return [(int(m), int(n)) for m, n in v]

    @field_validator("basis_unitary", mode="before")
    @classmethod
    def coerce_unitary(cls, v) -> np.ndarray:
        return np.asarray(v, dtype=complex)

    @model_validator(mode="after")
    def check_structure(self) -> "SubalgebraStructure":
        d = self.ambient_dim
        total = sum(m * n for m, n in self.blocks)
        if total != d:
            raise ValueError(f"block sizes sum to {total}, ambient dimension is {d}")
        u = self.basis_unitary
        if u.shape != (d, d):
            raise ValueError(f"basis unitary has shape {u.shape}, expected {(d, d)}")
        if np.abs(u @ u.conj().T - np.eye(d)).max() > 1e-10:
            raise ValueError("basis unitary is not unitary")
        return self

    @property
    def offsets(self) -> List[int]:
        out, pos = [], 0
        for m, n in self.blocks:
            out.append(pos)
            pos += m * n
        return out

    @property
    def env_dim(self) -> int:
        """Environment dimension Σₖ m_k² of the canonical Stinespring dilation"""
        return sum(m * m for m, _ in self.blocks)

    @property
    def algebra_dim(self) -> int:
        return sum(n * n for _, n in self.blocks)

    def to_payload(self) -> "SubalgebraPayload":
        return SubalgebraPayload(
            dim=self.ambient_dim,
            blocks=[list(b) for b in self.blocks],
            unitary=MatrixPayload.from_array(self.basis_unitary),
        )

    @classmethod
    def from_payload(cls, payload: "SubalgebraPayload") -> "SubalgebraStructure":
        return cls(
            ambient_dim=payload.dim,
            blocks=[tuple(b) for b in payload.blocks],
            basis_unitary=payload.unitary.to_array(),
        )


class SubalgebraPayload(BaseModel):
    """Subalgebra JSON format"""
    dim: int = Field(gt=0)
    blocks: List[List[int]]
    unitary: MatrixPayload


class GeneratorPayload(BaseModel):
    """Generator input for decomposition"""
    generators: List[MatrixPayload] = []
    mode: Literal["algebra", "commutant"] = "algebra"


class PimsnerPopaIndex(BaseModel):
    """Pimsner–Popa index λ of N in B(H), stored through its integer inverse"""
    inverse: int = Field(gt=0)

    @property
    def value(self) -> float:
        return 1.0 / self.inverse

    @property
    def fraction(self) -> Fraction:
        return Fraction(1, self.inverse)


class AxiomCheck(BaseModel):
    """Outcome of one axiom at one tensor power"""
    axiom: int
    name: str
    n: int
    samples: int
    violations: int = 0
    max_deviation: float = 0.0

    @property
    def passed(self) -> bool:
        return self.violations == 0


class AxiomsReport(BaseModel):
    """Sample-level verification of the free-state family axioms"""
    blocks: List[Tuple[int, int]]
    n_max: int
    checks: List[AxiomCheck] = []

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)
