import math
from pathlib import Path
from typing import List, Literal, Optional

from pydantic import BaseModel, Field, field_validator

from config.config import settings

Task = Literal["duality", "aep", "stein", "dilution", "decompose", "axioms"]


class ExperimentConfig(BaseModel):
    """One experiment: task, inputs, grids and output settings

    Empty grids fall back to the configured defaults.
    """
    task: Task
    state: str = "random"
    algebra: str = "diagonal(2)"
    eps: List[float] = Field(default_factory=lambda: list(settings.EPS_GRID))
    alpha: List[float] = Field(default_factory=lambda: list(settings.ALPHA_GRID))
    n_max: int = Field(default_factory=lambda: settings.N_MAX, ge=1)
    samples: int = Field(default=1, ge=1)
    tol: float = Field(default_factory=lambda: settings.TOL, gt=0)
    seed: int = Field(default_factory=lambda: settings.SEED)
    out: Optional[Path] = None
    format: Literal["json", "csv"] = "json"
    workers: int = Field(default_factory=lambda: settings.WORKERS, ge=1)

    @field_validator("eps", mode="before")
    @classmethod
    def default_eps(cls, v):
        return list(settings.EPS_GRID) if not v else v

    @field_validator("alpha", mode="before")
    @classmethod
    def default_alpha(cls, v):
        return list(settings.ALPHA_GRID) if not v else v

    @field_validator("eps")
    @classmethod
    def check_eps(cls, v: List[float]) -> List[float]:
        for e in v:
            if not 0 <= e < 1:
                raise ValueError(f"smoothing parameter {e} outside [0, 1)")
        return sorted(set(v))

    @field_validator("alpha")
    @classmethod
    def check_alpha(cls, v: List[float]) -> List[float]:
        for a in v:
            if math.isnan(a) or a < 0.5:
                raise ValueError(f"order {a} below 1/2")
        return sorted(set(v))

    @field_validator("out")
    @classmethod
    def check_out(cls, v: Optional[Path]) -> Optional[Path]:
        if v is not None and not v.parent.exists():
            raise ValueError(f"output directory {v.parent} does not exist")
        return v

    @field_validator("state", "algebra")
    @classmethod
    def check_file(cls, v: str) -> str:
        if v.endswith(".json") and not Path(v).exists():
            raise ValueError(f"file {v} does not exist")
        return v
