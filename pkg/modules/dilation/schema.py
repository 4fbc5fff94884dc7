from typing import List, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from modules.linops import partial_trace
from modules.linops.schema import MatrixPayload


class StinespringIsometry(BaseModel):
    """Isometry V: H_A → H_A ⊗ H_E, stored in (A, E) factor order"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    dim_in: int = Field(gt=0)
    dim_env: int = Field(gt=0)
    matrix: np.ndarray

    @field_validator("matrix", mode="before")
    @classmethod
    def coerce_matrix(cls, v) -> np.ndarray:
        return np.asarray(v, dtype=complex)

    @model_validator(mode="after")
    def check_isometry(self) -> "StinespringIsometry":
        d, de = self.dim_in, self.dim_env
        if self.matrix.shape != (d * de, d):
            raise ValueError(f"isometry has shape {self.matrix.shape}, expected {(d * de, d)}")
        if np.abs(self.matrix.conj().T @ self.matrix - np.eye(d)).max() > 1e-10:
            raise ValueError("V*V differs from the identity")
        return self

    def to_payload(self) -> "IsometryPayload":
        base = MatrixPayload.from_array(self.matrix)
        return IsometryPayload(**base.model_dump(), dim_in=self.dim_in, dim_env=self.dim_env)


class IsometryPayload(MatrixPayload):
    """Isometry JSON: matrix payload plus input and environment dimensions"""
    dim_in: int
    dim_env: int


class TripartitePureState(BaseModel):
    """Unit vector on H_E ⊗ H_A ⊗ H_F"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    dims: Tuple[int, int, int]
    vector: np.ndarray

    @field_validator("vector", mode="before")
    @classmethod
    def coerce_vector(cls, v) -> np.ndarray:
        return np.asarray(v, dtype=complex).reshape(-1)

    @model_validator(mode="after")
    def check_vector(self) -> "TripartitePureState":
        if self.vector.size != int(np.prod(self.dims)):
            raise ValueError(f"vector length {self.vector.size} does not match dims {self.dims}")
        if abs(np.linalg.norm(self.vector) - 1) > 1e-12:
            raise ValueError("tripartite state is not normalized")
        return self

    def density(self) -> np.ndarray:
        return np.outer(self.vector, self.vector.conj())

    def marginal(self, keep: Sequence[int]) -> np.ndarray:
        """Reduced state on the kept factors (0 = E, 1 = A, 2 = F)"""
        return partial_trace(self.density(), list(self.dims), keep)


class DomainSample(BaseModel):
    """Commutator of one sampled operator with the range projection VV*"""
    in_algebra: bool
    commutator_norm: float


class MultiplicativeDomainReport(BaseModel):
    """Commutators with VV* for operators inside and outside N"""
    tol: float
    samples: List[DomainSample] = []

    @property
    def consistent(self) -> bool:
        """Commutator vanishes exactly for the operators in N"""
        return all((s.commutator_norm <= self.tol) == s.in_algebra for s in self.samples)


class OrderInequalityReport(BaseModel):
    """Smallest eigenvalues of E(x) ⊗ 1_E − V E(x) V* over sampled PSD x"""
    tol: float
    min_eigenvalues: List[float] = []

    @property
    def passed(self) -> bool:
        return all(v >= -self.tol for v in self.min_eigenvalues)
