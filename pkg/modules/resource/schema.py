import math
from typing import Any, Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from modules.algebra.schema import SubalgebraStructure
from modules.linops.schema import MatrixPayload

CHANNEL_TOL = 1e-9


class ChannelPayload(BaseModel):
    """Channel JSON: dimensions and the Kraus list"""
    dim_in: int = Field(gt=0)
    dim_out: int = Field(gt=0)
    kraus: List[MatrixPayload]


class QuantumChannel(BaseModel):
    """Completely positive trace-preserving map stored through its Kraus operators

    The Choi matrix is Σᵢⱼ |i⟩⟨j| ⊗ Φ(|i⟩⟨j|), input factor first.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    dim_in: int = Field(gt=0)
    dim_out: int = Field(gt=0)
    kraus: List[np.ndarray]

    @field_validator("kraus", mode="before")
    @classmethod
    def coerce_kraus(cls, v) -> List[np.ndarray]:
        return [np.atleast_2d(np.asarray(k, dtype=complex)) for k in v]

    @model_validator(mode="after")
    def check_channel(self) -> "QuantumChannel":
        if not self.kraus:
            raise ValueError("channel needs at least one Kraus operator")
        for k in self.kraus:
            if k.shape != (self.dim_out, self.dim_in):
                raise ValueError(f"Kraus operator shape {k.shape} != ({self.dim_out}, {self.dim_in})")
        completeness = sum(k.conj().T @ k for k in self.kraus)
        deviation = float(np.abs(completeness - np.eye(self.dim_in)).max())
        if deviation > CHANNEL_TOL:
            raise ValueError(f"Kraus operators are not trace preserving (deviation {deviation:.2e})")
        return self

    def apply(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (self.dim_in, self.dim_in):
            raise ValueError(f"input shape {rho.shape} does not match channel input {self.dim_in}")
        return sum(k @ rho @ k.conj().T for k in self.kraus)

    def choi(self) -> np.ndarray:
        out = np.zeros((self.dim_in * self.dim_out,) * 2, dtype=complex)
        for i in range(self.dim_in):
            for j in range(self.dim_in):
                unit = np.zeros((self.dim_in, self.dim_in), dtype=complex)
                unit[i, j] = 1.0
                out += np.kron(unit, self.apply(unit))
        return out

    def compose(self, first: "QuantumChannel") -> "QuantumChannel":
        """self ∘ first"""
        if first.dim_out != self.dim_in:
            raise ValueError(f"cannot compose: {first.dim_out} outputs into {self.dim_in} inputs")
        return QuantumChannel(
            dim_in=first.dim_in,
            dim_out=self.dim_out,
            kraus=[k @ l for k in self.kraus for l in first.kraus],
        )

    @classmethod
    def from_choi(cls, choi: np.ndarray, dim_in: int, dim_out: int) -> "QuantumChannel":
        """Kraus operators from the eigendecomposition of a PSD Choi matrix

        Raises:
            ValueError: if the Choi matrix has an eigenvalue below −1e−9
        """
        choi = np.asarray(choi, dtype=complex)
        evals, evecs = np.linalg.eigh((choi + choi.conj().T) / 2)
        if evals[0] < -CHANNEL_TOL:
            raise ValueError(f"Choi matrix is not PSD (eigenvalue {evals[0]:.3e})")
        cutoff = max(evals[-1], 1.0) * 1e-14
        kraus = [
            math.sqrt(lam) * evecs[:, k].reshape(dim_in, dim_out).T
            for k, lam in enumerate(evals) if lam > cutoff
        ]
        return cls(dim_in=dim_in, dim_out=dim_out, kraus=kraus)

    @classmethod
    def identity(cls, d: int) -> "QuantumChannel":
        return cls(dim_in=d, dim_out=d, kraus=[np.eye(d)])

    @classmethod
    def preparation(cls, dim_in: int, state: np.ndarray) -> "QuantumChannel":
        """x ↦ tr(x)·state"""
        state = np.asarray(state, dtype=complex)
        return cls.from_choi(np.kron(np.eye(dim_in), state), dim_in, state.shape[0])

    def to_payload(self) -> ChannelPayload:
        return ChannelPayload(
            dim_in=self.dim_in,
            dim_out=self.dim_out,
            kraus=[MatrixPayload.from_array(k) for k in self.kraus],
        )

    @classmethod
    def from_payload(cls, payload: ChannelPayload) -> "QuantumChannel":
        return cls(dim_in=payload.dim_in, dim_out=payload.dim_out, kraus=[k.to_array() for k in payload.kraus])


class ChannelCheck(BaseModel):
    """Residuals of the predicate battery run on a constructed channel"""
    choi_min_eigenvalue: float
    trace_preservation: float
    target_deviation: float
    class_deviation: float
    tol: float = CHANNEL_TOL

    @property
    def passed(self) -> bool:
        return (
            self.choi_min_eigenvalue >= -self.tol
            and self.trace_preservation <= self.tol
            and self.target_deviation <= self.tol
            and self.class_deviation <= self.tol
        )


class DilutionResult(BaseModel):
    """Channel preparing a target from the maximally coherent state of a diagonal source"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    operation_class: Literal["MIO", "DIO"]
    source: SubalgebraStructure
    channel: QuantumChannel
    target: np.ndarray
    n: int = Field(gt=0)
    fidelity_achieved: float = Field(ge=0.0, le=1.0 + 1e-9)
    check: ChannelCheck
    asymptotic_cost: Optional[float] = None

    @property
    def cost_bits(self) -> float:
        """log₂ λ_M⁻¹ of the diagonal source, that is log₂ n"""
        return math.log2(self.n)

    def to_row(self) -> Dict[str, Any]:
        return {
            "class": self.operation_class,
            "n": self.n,
            "cost_bits": self.cost_bits,
            "fidelity": self.fidelity_achieved,
            "channel_checks_passed": self.check.passed,
            "asymptotic_cost": self.asymptotic_cost,
        }


class CostBracket(BaseModel):
    """lower ≤ one-shot cost ≤ upper, with the channel realizing the upper end"""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    epsilon: float
    lower: float
    upper: float
    witness: DilutionResult

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def fidelity_ok(self) -> bool:
        return self.witness.fidelity_achieved >= 1 - self.epsilon - 1e-6

    @property
    def passed(self) -> bool:
        return self.width <= 1 + 1e-6 and self.fidelity_ok and self.witness.check.passed

    def to_row(self) -> Dict[str, Any]:
        row = {
            "epsilon": self.epsilon,
            "lower_bits": round(self.lower, 6),
            "upper_bits": round(self.upper, 6),
            "width": self.width,
            "passed": self.passed,
        }
        row.update(self.witness.to_row())
        return row


class MonotonicityRow(BaseModel):
    alpha: float
    before: float
    after: float
    slack: float = 1e-5

    @property
    def passed(self) -> bool:
        if math.isinf(self.before):
            return True
        return self.after <= self.before + self.slack


class MonotonicityReport(BaseModel):
    """D_α(Φ(ρ)‖N) ≤ D_α(ρ‖M) across orders"""
    rows: List[MonotonicityRow] = []

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)
