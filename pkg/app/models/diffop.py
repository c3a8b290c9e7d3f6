"""
Linear differential operators  P = sum_I c_I(x) d^I.

Coefficients are one of ``Constant``, ``Analytic`` (a TrigPoly per domain
component) or ``Sampled`` (values on a verification grid).
"""

from dataclasses import dataclass
from typing import Optional, Union

from app.core.errors import DimensionMismatchError, GridMismatchError
from app.core.scalars import Scalar, ScalarMode, is_zero, to_scalar
from app.models.grid import GridField, GridSpec
from app.models.multiindex import MultiIndex


@dataclass(frozen=True)
class Constant:
    value: Scalar

    kind = "const"

    def vanishes(self, mode: ScalarMode) -> bool:
        return is_zero(self.value, mode)


@dataclass(frozen=True, eq=False)
class Analytic:
    polys: tuple  # one TrigPoly per component

    kind = "trig"

    def vanishes(self, mode: ScalarMode) -> bool:
        return all(p.is_zero for p in self.polys)


@dataclass(frozen=True, eq=False)
class Sampled:
    field: GridField

    kind = "grid"

    @property
    def grid(self) -> GridSpec:
        return self.field.grid

    def vanishes(self, mode: ScalarMode) -> bool:
        return self.field.is_zero()


Coefficient = Union[Constant, Analytic, Sampled]


@dataclass(frozen=True, eq=False)
class DiffOp:
    dimension: int
    terms: tuple  # (MultiIndex, Coefficient) pairs in graded-lex order, no zero coefficients
    components: int = 1
    mode: ScalarMode = "float"

    @classmethod
    def from_terms(
        cls,
        dimension: int,
        terms,
        components: int = 1,
        mode: ScalarMode = "float",
    ) -> "DiffOp":
        """Build from a mapping or pairs; zero coefficients are dropped and repeated indices rejected."""
        pairs = terms.items() if isinstance(terms, dict) else terms
        kept: dict = {}
        for index, coeff in pairs:
            if not isinstance(index, MultiIndex):
                index = MultiIndex(tuple(index))
            if index.dimension != dimension:
                raise DimensionMismatchError(dimension, index.dimension, "multi-index")
            if index in kept:
                raise ValueError(f"Repeated multi-index {index}.")
            if isinstance(coeff, Constant):
                coeff = Constant(to_scalar(coeff.value, mode))
            elif isinstance(coeff, Analytic):
                if len(coeff.polys) != components:
                    raise DimensionMismatchError(components, len(coeff.polys), "coefficient components")
                coeff = Analytic(tuple(p.to_mode(mode) for p in coeff.polys))
            elif isinstance(coeff, Sampled):
                if coeff.grid.components != components or coeff.grid.dimension != dimension:
                    raise GridMismatchError("Sampled coefficient grid does not match the operator domain.")
            else:
                coeff = Constant(to_scalar(coeff, mode))
            if not coeff.vanishes(mode):
                kept[index] = coeff
        ordered = tuple(sorted(kept.items(), key=lambda item: item[0].sort_key()))
        op = cls(dimension, ordered, components, mode)
        op.grid  # raises on mixed grids
        return op

    @property
    def order(self) -> int:
        return max((index.degree for index, _ in self.terms), default=0)

    @property
    def indices(self) -> list[MultiIndex]:
        return [index for index, _ in self.terms]

    def as_dict(self) -> dict:
        return dict(self.terms)

    def coefficient(self, index: MultiIndex) -> Optional[Coefficient]:
        return self.as_dict().get(index)

    def leading_terms(self) -> tuple:
        d = self.order
        return tuple((index, coeff) for index, coeff in self.terms if index.degree == d)

    @property
    def grid(self) -> Optional[GridSpec]:
        grids = [coeff.grid for _, coeff in self.terms if isinstance(coeff, Sampled)]
        if not grids:
            return None
        for other in grids[1:]:
            grids[0].check_same(other)
        return grids[0]

    @property
    def is_analytic(self) -> bool:
        return all(not isinstance(coeff, Sampled) for _, coeff in self.terms)

    def __str__(self) -> str:
        parts = []
        for index, coeff in self.terms:
            if isinstance(coeff, Constant):
                label = str(coeff.value)
            elif isinstance(coeff, Analytic):
                label = "[" + "; ".join(str(p) for p in coeff.polys) + "]"
            else:
                label = "<sampled>"
            parts.append(f"{label}*d{index}")
        return " + ".join(parts) if parts else "0"
