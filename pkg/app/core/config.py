"""
Engine configuration.

Values come from the environment (optionally a ``.env`` file) and are frozen
into a validated ``Settings`` instance.
"""

import os
from functools import lru_cache
from typing import Literal

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, field_validator

# Load environment variables
load_dotenv()


class EngineConfig:
    """Static defaults"""

    # Verification grid resolution per torus dimension
    DEFAULT_GRID = {
        1: 256,
        2: 64,
        3: 16,
    }

    # Sphere samples used for ellipticity scans
    SPHERE_SAMPLES = {
        1: 2,
        2: 64,
        3: 128,
    }

    MIN_QUADRATURE = 64
    MAX_GROWTH_STEPS = 8
    PATCH_CONDITION_LIMIT = 1e8
    INDEPENDENCE_FACTOR = 1e-6
    DEFINING_TERM_LIMIT = 10**6
    TRIG_FIT_RETRIES = 3
    WITNESS_MAX_N = 8


class Settings(BaseModel):
    model_config = ConfigDict(frozen=True)

    tol: float = 1e-9
    rank_tol: float = 1e-9
    elliptic_margin: float = 1e-6
    quadrature: int = 2048
    stage_limit: int = 32
    log_level: str = "WARNING"
    mode: Literal["exact", "float"] = "float"

    @field_validator("tol", "rank_tol", "elliptic_margin")
    @classmethod
    def tolerance_must_be_positive(cls, v: float) -> float:
        if not v > 0:
            raise ValueError("Tolerances must be positive.")
        return v

    @field_validator("quadrature")
    @classmethod
    def quadrature_must_be_fine_enough(cls, v: int) -> int:
        if v < EngineConfig.MIN_QUADRATURE:
            raise ValueError(f"Quadrature resolution must be at least {EngineConfig.MIN_QUADRATURE}.")
        return v

    @field_validator("stage_limit")
    @classmethod
    def stage_limit_must_be_positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError("Stage limit must be at least 1.")
        return v

    @field_validator("log_level")
    @classmethod
    def log_level_must_be_known(cls, v: str) -> str:
        v = v.upper()
        if v not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"Unknown log level: {v}")
        return v


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """
    Build settings from environment variables.

    Returns:
        Frozen, validated settings
    """
    return Settings(
        tol=os.getenv("ANNIHILATOR_TOL", "1e-9"),
        rank_tol=os.getenv("ANNIHILATOR_RANK_TOL", "1e-9"),
        elliptic_margin=os.getenv("ANNIHILATOR_ELLIPTIC_MARGIN", "1e-6"),
        quadrature=os.getenv("ANNIHILATOR_QUADRATURE", "2048"),
        stage_limit=os.getenv("ANNIHILATOR_STAGE_LIMIT", "32"),
        log_level=os.getenv("ANNIHILATOR_LOG_LEVEL", "WARNING"),
        mode=os.getenv("ANNIHILATOR_MODE", "float"),
    )


def default_grid_resolution(dimension: int) -> int:
    if dimension not in EngineConfig.DEFAULT_GRID:
        raise ValueError(f"Unsupported dimension: {dimension}. Use 1, 2 or 3.")
    return EngineConfig.DEFAULT_GRID[dimension]
