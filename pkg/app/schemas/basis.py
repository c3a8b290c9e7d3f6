from typing import Literal, Union

import sympy as sp
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from app.core.scalars import parse_rational


class TermIn(BaseModel):
    model_config = ConfigDict(extra="forbid")

    freq: list[int]
    phase: Literal["cos", "sin"]
    coeff: Union[int, float, str]

    @field_validator("coeff")
    @classmethod
    def coeff_must_be_numeric(cls, v):
        if isinstance(v, str):
            try:
                parse_rational(v)
            except ValueError:
                try:
                    value = sp.sympify(v)
                except (sp.SympifyError, TypeError) as exc:
                    raise ValueError(f"Invalid coefficient: {v!r}") from exc
                if not (value.is_number and value.is_real):
                    raise ValueError(f"Coefficient {v!r} is not a real number.")
        return v


class BasisElementIn(BaseModel):
    model_config = ConfigDict(extra="forbid")

    component: int = 0
    terms: list[TermIn]

    @field_validator("component")
    @classmethod
    def component_must_be_non_negative(cls, v: int) -> int:
        if v < 0:
            raise ValueError("Component index must be non-negative.")
        return v


class BasisFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dimension: int
    components: int = 1
    mode: Literal["exact", "float"] = "float"
    basis: list[BasisElementIn]

    @field_validator("dimension")
    @classmethod
    def dimension_must_be_supported(cls, v: int) -> int:
        if v not in (1, 2, 3):
            raise ValueError("Torus dimension must be 1, 2 or 3.")
        return v

    @field_validator("components")
    @classmethod
    def components_must_be_positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError("At least one component is required.")
        return v

    @field_validator("basis")
    @classmethod
    def basis_must_not_be_empty(cls, v: list) -> list:
        if not v:
            raise ValueError("Basis cannot be empty.")
        return v

    @model_validator(mode="after")
    def validate_shapes(self) -> "BasisFile":
        for i, element in enumerate(self.basis):
            if element.component >= self.components:
                raise ValueError(
                    f"Basis function {i + 1} lives on component {element.component}, "
                    f"but the domain has {self.components}."
                )
            for term in element.terms:
                if len(term.freq) != self.dimension:
                    raise ValueError(
                        f"Basis function {i + 1}: frequency {term.freq} does not have {self.dimension} entries."
                    )
        return self
