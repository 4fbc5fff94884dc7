from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from config.config import settings


class MatrixPayload(BaseModel):
    """Wire format for a dense complex matrix (row-major [re, im] pairs)"""
    rows: int = Field(gt=0)
    cols: int = Field(gt=0)
    data: List[List[float]]

    @field_validator("data")
    @classmethod
    def check_pairs(cls, v: List[List[float]]) -> List[List[float]]:
        for entry in v:
            if len(entry) != 2:
                raise ValueError("every entry must be a [re, im] pair")
            if not all(np.isfinite(entry)):
                raise ValueError("entries must be finite")
        return v

    @model_validator(mode="after")
    def check_count(self) -> "MatrixPayload":
        if len(self.data) != self.rows * self.cols:
            raise ValueError(
                f"expected {self.rows * self.cols} entries, got {len(self.data)}"
            )
        return self

    @classmethod
    def from_array(cls, m: np.ndarray) -> "MatrixPayload":
        m = np.atleast_2d(np.asarray(m, dtype=complex))
        flat = m.reshape(-1)
        return cls(
            rows=m.shape[0],
            cols=m.shape[1],
            data=[[float(z.real), float(z.imag)] for z in flat],
        )

    def to_array(self) -> np.ndarray:
        values = np.array([complex(re, im) for re, im in self.data], dtype=complex)
        return values.reshape(self.rows, self.cols)


class DensityPayload(MatrixPayload):
    """Matrix payload of a density operator"""
    substate: bool = False


class DensityOperator(BaseModel):
    """Hermitian PSD matrix with unit trace (or trace at most one for substates)"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    matrix: np.ndarray
    substate_allowed: bool = False

    @field_validator("matrix", mode="before")
    @classmethod
    def coerce_matrix(cls, v) -> np.ndarray:
        m = np.asarray(v, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"density operator must be square, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("density operator entries must be finite")
        return m

    @model_validator(mode="after")
    def check_state(self) -> "DensityOperator":
        m = self.matrix
        scale = max(np.abs(m).max(), 1.0)
        if np.abs(m - m.conj().T).max() > settings.HERMITIAN_TOL * scale:
            raise ValueError("density operator is not Hermitian")
        herm = (m + m.conj().T) / 2
        evals = np.linalg.eigvalsh(herm)
        if evals[0] < -settings.PSD_TOL * max(evals[-1], 1e-300):
            raise ValueError(f"density operator has negative eigenvalue {evals[0]:.3e}")
        trace = float(np.real(np.trace(herm)))
        if self.substate_allowed:
            if not (0 < trace <= 1 + 1e-9):
                raise ValueError(f"substate trace {trace} outside (0, 1]")
        elif abs(trace - 1) > 1e-9:
            raise ValueError(f"state trace {trace} differs from 1")
        object.__setattr__(self, "matrix", herm)
        return self

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    def to_payload(self) -> DensityPayload:
        base = MatrixPayload.from_array(self.matrix)
        return DensityPayload(**base.model_dump(), substate=self.substate_allowed)

    @classmethod
    def from_payload(cls, payload: DensityPayload) -> "DensityOperator":
        return cls(matrix=payload.to_array(), substate_allowed=payload.substate)


class Projection(BaseModel):
    """Orthogonal projection"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    matrix: np.ndarray

    @field_validator("matrix", mode="before")
    @classmethod
    def coerce_matrix(cls, v) -> np.ndarray:
        return np.asarray(v, dtype=complex)

    @model_validator(mode="after")
    def check_projection(self) -> "Projection":
        p = self.matrix
        if np.abs(p - p.conj().T).max() > 1e-9:
            raise ValueError("projection is not Hermitian")
        if np.abs(p @ p - p).max() > 1e-9:
            raise ValueError("matrix is not idempotent")
        return self

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def rank(self) -> int:
        return int(round(float(np.real(np.trace(self.matrix)))))
