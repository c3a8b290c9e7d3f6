from typing import Union

from pydantic import BaseModel, ConfigDict, field_validator

from app.core.config import EngineConfig
from app.core.scalars import parse_rational


class ArcIn(BaseModel):
    model_config = ConfigDict(extra="forbid")

    center: Union[str, float]
    radius: float

    @field_validator("center")
    @classmethod
    def center_must_be_number(cls, v):
        if isinstance(v, str):
            parse_rational(v)
        return v

    @field_validator("radius")
    @classmethod
    def radius_must_be_positive(cls, v: float) -> float:
        if v <= 0:
            raise ValueError("Arc radius must be positive.")
        return v


class CoverFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    arcs: list[ArcIn]
    quadrature: int = 2048

    @field_validator("arcs")
    @classmethod
    def arcs_must_not_be_empty(cls, v: list) -> list:
        if not v:
            raise ValueError("Cover needs at least one arc.")
        return v

    @field_validator("quadrature")
    @classmethod
    def quadrature_must_be_fine_enough(cls, v: int) -> int:
        if v < EngineConfig.MIN_QUADRATURE:
            raise ValueError(f"Quadrature resolution must be at least {EngineConfig.MIN_QUADRATURE}.")
        return v
