from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from app.models.diffop import DiffOp
from app.models.grid import GridField
from app.models.jets import FunctionalSpan


@dataclass(frozen=True, eq=False)
class Stage:
    """
    One step of the descending chain: the tuple chosen at ``seed`` and the
    grid points of F_k where it stays independent.
    """

    number: int
    seed: int
    span: FunctionalSpan
    rank: int
    order: int
    region: np.ndarray  # indices of F_k that fall in V_k
    remaining: np.ndarray  # F_{k+1}


@dataclass(frozen=True, eq=False)
class Stratification:
    stages: tuple
    order: int  # max q_k

    @property
    def count(self) -> int:
        return len(self.stages)


@dataclass(frozen=True, eq=False)
class DefiningFunction:
    """
    Gram determinant of a stage tuple. ``polys`` holds the exact TrigPoly per
    component when available; ``samples`` is always filled on the grid.
    """

    stage: int
    samples: GridField
    polys: Optional[tuple] = None
    term_count: int = 0
    sampled_fallback: bool = False


@dataclass(frozen=True, eq=False)
class StageFit:
    stage: int
    model: str
    residual: float
    zero_set_change: float
    cutoff: Optional[int] = None
    fell_back: bool = False


@dataclass(frozen=True, eq=False)
class StratifiedResult:
    operator: DiffOp
    stratification: Stratification
    fits: tuple
    residual_sup: float
    constant_form: Optional[DiffOp] = None
    notes: list = field(default_factory=list)
