from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.schemas.basis import TermIn
from app.schemas.report import SymbolReport


class ConstCoeff(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["const"] = "const"
    value: Union[float, str]


class TrigCoeff(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["trig"] = "trig"
    components: list[list[TermIn]]


class GridCoeff(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["grid"] = "grid"
    resolution: int
    values: list[float]

    @field_validator("resolution")
    @classmethod
    def resolution_must_be_positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError("Grid resolution must be positive.")
        return v


CoeffIn = Annotated[Union[ConstCoeff, TrigCoeff, GridCoeff], Field(discriminator="kind")]


class OperatorTerm(BaseModel):
    model_config = ConfigDict(extra="forbid")

    index: list[int]
    coeff: CoeffIn

    @field_validator("index")
    @classmethod
    def index_must_be_non_negative(cls, v: list[int]) -> list[int]:
        if not v or any(e < 0 for e in v):
            raise ValueError("Multi-index entries must be non-negative.")
        return v


class OperatorFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dimension: int
    components: int = 1
    mode: Literal["exact", "float"] = "float"
    order: int
    terms: list[OperatorTerm]
    symbol_report: Optional[SymbolReport] = None

    @model_validator(mode="after")
    def validate_terms(self) -> "OperatorFile":
        for term in self.terms:
            if len(term.index) != self.dimension:
                raise ValueError(f"Multi-index {term.index} does not have {self.dimension} entries.")
            coeff = term.coeff
            if isinstance(coeff, TrigCoeff) and len(coeff.components) != self.components:
                raise ValueError("Trigonometric coefficient must list one polynomial per component.")
            if isinstance(coeff, GridCoeff):
                expected = self.components * coeff.resolution ** self.dimension
                if len(coeff.values) != expected:
                    raise ValueError(f"Grid coefficient needs {expected} values, got {len(coeff.values)}.")
        top = max((sum(term.index) for term in self.terms), default=0)
        if self.terms and top != self.order:
            raise ValueError(f"Declared order {self.order} does not match the terms (max |I| = {top}).")
        return self
