from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from app.models.diffop import DiffOp
from app.models.grid import GridSpec
from app.models.jets import FunctionalSpan


@dataclass(frozen=True)
class Arc:
    center: Fraction
    radius: float


@dataclass(frozen=True, eq=False)
class ChartCover:
    """Arc cover of the circle with its partition functions tabulated on Q nodes."""

    arcs: tuple
    quadrature: int
    partition: np.ndarray  # (len(arcs), quadrature)


@dataclass(frozen=True, eq=False)
class CoverPatch:
    """
    Periodic box {x : max_a |x_a - center_a|_circle < half_width} on one component.
    ``half_width >= 1/2`` means the whole component.
    """

    component: int
    center: tuple
    half_width: float
    span: FunctionalSpan
    margin: float
    condition: float
    seed_index: int

    @property
    def whole(self) -> bool:
        return self.half_width >= 0.5


@dataclass(frozen=True, eq=False)
class PartitionOfUnity:
    grid: GridSpec
    weights: np.ndarray  # (patches, grid points)


@dataclass(frozen=True, eq=False)
class PatchFields:
    """Coefficient fields c_i(x) of one patch at the grid points inside it."""

    patch: CoverPatch
    points: np.ndarray  # grid indices inside the patch support
    values: np.ndarray  # (len(points), span.rank)
    method: str
    residual: float


@dataclass(frozen=True, eq=False)
class GluedOperator:
    operator: DiffOp
    residual_sup: float
    worst_point: Optional[int]
    worst_basis: Optional[int]
    triangle_ok: bool
    symbol_report: Optional[object] = None
    notes: list = field(default_factory=list)


@dataclass(frozen=True, eq=False)
class ConstantRankResult:
    glued: GluedOperator
    patches: tuple
    fields: tuple
    partition: PartitionOfUnity
    method_agreement: Optional[float]
    partition_error: float
