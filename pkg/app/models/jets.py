from dataclasses import dataclass, field
from typing import Any, Optional

from app.core.scalars import ScalarMode
from app.models.diffop import DiffOp
from app.models.grid import GridPoint
from app.models.multiindex import MultiIndex


@dataclass(frozen=True, eq=False)
class JetMatrix:
    """
    Rows: multi-indices |I| <= order in graded-lex order. Columns: basis of S.
    ``values`` is a numpy array in float mode and a sympy Matrix in exact mode.
    """

    point: GridPoint
    order: int
    indices: tuple
    values: Any
    mode: ScalarMode = "float"

    @property
    def shape(self) -> tuple:
        return (len(self.indices), self.values.shape[1])

    def row(self, index: MultiIndex):
        position = self.indices.index(index)
        if self.mode == "exact":
            return self.values[position, :]
        return self.values[position]

    def rows(self, indices) -> Any:
        positions = [self.indices.index(i) for i in indices]
        if self.mode == "exact":
            return self.values.extract(positions, list(range(self.values.shape[1])))
        return self.values[positions]


@dataclass(frozen=True)
class FunctionalSpan:
    """Derivative functionals P_i = d^{I_i} spanning V_x, chosen greedily."""

    indices: tuple

    @property
    def rank(self) -> int:
        return len(self.indices)

    @property
    def order(self) -> int:
        return max((i.degree for i in self.indices), default=0)


@dataclass(frozen=True, eq=False)
class Annihilator:
    """Basis of {c : sum_I c_I d^I f(x) = 0 for all f in S}; one vector per basis element."""

    indices: tuple
    vectors: tuple
    mode: ScalarMode = "float"

    @property
    def dimension(self) -> int:
        return len(self.vectors)


@dataclass(frozen=True, eq=False)
class PointwiseOperator:
    point: GridPoint
    reference: DiffOp
    span: FunctionalSpan
    coefficients: tuple
    operator: DiffOp
    residual: float = 0.0
    notes: Optional[list] = field(default=None)
