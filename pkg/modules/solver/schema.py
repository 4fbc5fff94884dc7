import math
from typing import Any, Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from config.config import settings
from modules.algebra.schema import SubalgebraStructure
from modules.linops.schema import MatrixPayload

CertificateKind = Literal[
    "dmax_subalgebra",
    "dmax_pair_smooth",
    "dmax_subalgebra_smooth",
    "dh_subalgebra",
    "dmin_subalgebra",
]


class SolverOptions(BaseModel):
    """Per-call solver settings, defaulting to the global configuration"""
    tol: float = Field(default_factory=lambda: settings.TOL)
    max_iter: int = Field(default_factory=lambda: settings.MAX_ITER)
    seed: int = Field(default_factory=lambda: settings.SEED)
    solver: str = Field(default_factory=lambda: settings.SDP_SOLVER)
    multi_start: int = Field(default_factory=lambda: settings.MULTI_START)

    @field_validator("tol")
    @classmethod
    def check_tol(cls, v: float) -> float:
        if v <= 0:
            raise ValueError("tol must be positive")
        return v

    @field_validator("max_iter", "multi_start")
    @classmethod
    def check_count(cls, v: int) -> int:
        if v < 1:
            raise ValueError("iteration counts must be at least 1")
        return v

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


class SolverCertificate(BaseModel):
    """Primal and dual feasible points of a semidefinite program with their gap

    `primal_objective` and `dual_objective` are in the units of the linear
    objective (trace, type-II error or fidelity); `value` is the derived
    entropy in bits. Problem data needed for re-verification lives in `data`.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    kind: CertificateKind
    value: float
    primal_objective: float
    dual_objective: float
    primal: Dict[str, Any] = {}
    dual: Dict[str, Any] = {}
    data: Dict[str, Any] = {}
    structure: Optional[SubalgebraStructure] = None
    epsilon: float = 0.0
    gap: float = Field(ge=0.0)
    iterations: int = 0
    tol: float

    @property
    def converged(self) -> bool:
        return self.gap <= 10 * self.tol

    def to_json(self) -> Dict[str, Any]:
        """Audit summary; matrices are written in the matrix wire format"""

        def encode(entries: Dict[str, Any]) -> Dict[str, Any]:
            out = {}
            for key, val in entries.items():
                if isinstance(val, np.ndarray) and val.ndim == 2:
                    out[key] = MatrixPayload.from_array(val).model_dump()
                elif isinstance(val, (list, tuple)) and val and isinstance(val[0], np.ndarray):
                    out[key] = [MatrixPayload.from_array(v).model_dump() for v in val]
                else:
                    out[key] = float(val) if isinstance(val, (np.floating, float)) else val
            return out

        return {
            "kind": self.kind,
            "value_bits": self.value if math.isfinite(self.value) else None,
            "primal_objective": self.primal_objective,
            "dual_objective": self.dual_objective,
            "gap": self.gap,
            "iterations": self.iterations,
            "tol": self.tol,
            "epsilon": self.epsilon,
            "primal": encode(self.primal),
            "dual": encode(self.dual),
        }


class LocalSearchReport(BaseModel):
    """Outcome of a multi-start local search"""
    starts: int
    values: List[float] = []
    iterations: List[int] = []
    spread: float = 0.0
    converged: bool = True


class CertificateCheck(BaseModel):
    """Independent re-verification of a certificate"""
    kind: str
    primal_residual: float
    dual_residual: float
    gap: float
    tol: float

    @property
    def primal_feasible(self) -> bool:
        return self.primal_residual <= self.tol

    @property
    def dual_feasible(self) -> bool:
        return self.dual_residual <= self.tol

    @property
    def passed(self) -> bool:
        return self.primal_feasible and self.dual_feasible and self.gap <= 10 * self.tol
