from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, field_validator


class AnnihilateOptions(BaseModel):
    """Knobs of ``discover_annihilator``; unset values come from ``get_settings()``."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    method: Literal["auto", "constant-rank", "stratified"] = "auto"
    grid: Optional[int] = None
    tol: Optional[float] = None
    elliptic_order: Optional[int] = None
    negate: bool = False
    coeff_model: Literal["grid", "trig"] = "grid"
    coefficient_method: Literal["direct", "dual_frame"] = "direct"
    timings: bool = False

    @field_validator("grid")
    @classmethod
    def grid_must_be_usable(cls, v: Optional[int]) -> Optional[int]:
        if v is not None and v < 2:
            raise ValueError("Grid resolution must be at least 2.")
        return v

    @field_validator("tol")
    @classmethod
    def tol_must_be_positive(cls, v: Optional[float]) -> Optional[float]:
        if v is not None and not v > 0:
            raise ValueError("Tolerance must be positive.")
        return v

    @field_validator("elliptic_order")
    @classmethod
    def order_must_be_positive(cls, v: Optional[int]) -> Optional[int]:
        if v is not None and v < 1:
            raise ValueError("Elliptic order must be positive.")
        return v
