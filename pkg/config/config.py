from typing import List
import math

from pydantic import field_validator
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """
    Toolkit settings loaded from environment variables
    """
    # Project
    PROJECT_NAME: str = "Subalgebra Entropy Toolkit"
    DEBUG: bool = False
    LOG_LEVEL: str = "INFO"

    # Solver defaults
    TOL: float = 1e-7
    MAX_ITER: int = 500
    SEED: int = 0xC0FFEE
    SDP_SOLVER: str = "CLARABEL"
    MULTI_START: int = 4

    # Dimension guard for tensor powers and dilations
    MAX_DIM: int = 512

    # Numerical thresholds
    HERMITIAN_TOL: float = 1e-10
    SUPPORT_TOL: float = 1e-12
    PSD_TOL: float = 1e-9
    DEGENERACY_GAP: float = 1e-7
    DECOMPOSE_RETRIES: int = 20

    # Experiment grids
    GRID_POINTS: int = 10_000
    EPS_GRID: List[float] = [0.01, 0.1, 0.3]
    ALPHA_GRID: List[float] = [0.5, 1.0, 2.0, math.inf]
    N_MAX: int = 4

    # Batch execution
    WORKERS: int = 1

    @field_validator("TOL", "HERMITIAN_TOL", "SUPPORT_TOL", "PSD_TOL", "DEGENERACY_GAP")
    @classmethod
    def check_positive(cls, v: float) -> float:
        if v <= 0:
            raise ValueError("tolerances must be positive")
        return v

    @field_validator("MAX_ITER", "MULTI_START", "DECOMPOSE_RETRIES", "WORKERS", "N_MAX")
    @classmethod
    def check_count(cls, v: int) -> int:
        if v < 1:
            raise ValueError("counts must be at least 1")
        return v

    # Pydantic v2 configuration
    model_config = {
        "env_file": ".env",
        "case_sensitive": True,
    }


# Create a global settings instance
settings = Settings()
