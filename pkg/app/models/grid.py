from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import product

import numpy as np

from app.core.errors import GridMismatchError


@dataclass(frozen=True)
class GridPoint:
    component: int
    coords: tuple  # Fractions in [0, 1)

    def as_floats(self) -> tuple:
        return tuple(float(c) for c in self.coords)

    def __str__(self) -> str:
        return f"c{self.component}:(" + ", ".join(str(c) for c in self.coords) + ")"


@dataclass(frozen=True)
class GridSpec:
    """
    Uniform grid with ``resolution`` points per axis on every component.

    Points are ordered component-major, then lexicographically with axis 0
    outermost.
    """

    dimension: int
    resolution: int
    components: int = 1

    def __post_init__(self):
        if self.resolution < 1:
            raise ValueError("Grid resolution must be positive.")
        if self.components < 1:
            raise ValueError("Grid needs at least one component.")

    @property
    def points_per_component(self) -> int:
        return self.resolution ** self.dimension

    @property
    def size(self) -> int:
        return self.components * self.points_per_component

    @cached_property
    def _lattice(self) -> np.ndarray:
        return np.array(list(product(range(self.resolution), repeat=self.dimension)), dtype=int)

    @cached_property
    def coordinates(self) -> np.ndarray:
        """(size, n) float coordinates."""
        return np.tile(self._lattice / self.resolution, (self.components, 1))

    @cached_property
    def lattice(self) -> np.ndarray:
        """(size, n) integer lattice indices."""
        return np.tile(self._lattice, (self.components, 1))

    @cached_property
    def component_ids(self) -> np.ndarray:
        return np.repeat(np.arange(self.components), self.points_per_component)

    def component_slice(self, c: int) -> slice:
        start = c * self.points_per_component
        return slice(start, start + self.points_per_component)

    def point(self, index: int) -> GridPoint:
        component = int(self.component_ids[index])
        return GridPoint(component, tuple(Fraction(int(i), self.resolution) for i in self.lattice[index]))

    def points(self) -> list[GridPoint]:
        return [self.point(i) for i in range(self.size)]

    def index_of(self, point: GridPoint) -> int:
        lattice = []
        for c in point.coords:
            scaled = Fraction(c) * self.resolution
            if scaled.denominator != 1:
                raise GridMismatchError(f"Point {point} is not on the {self.resolution}-grid.")
            lattice.append(int(scaled) % self.resolution)
        offset = 0
        for i in lattice:
            offset = offset * self.resolution + i
        return point.component * self.points_per_component + offset

    def check_same(self, other: "GridSpec") -> None:
        if self != other:
            raise GridMismatchError(
                f"Grid mismatch: {self.resolution}^{self.dimension} x{self.components} "
                f"vs {other.resolution}^{other.dimension} x{other.components}."
            )


@dataclass(frozen=True, eq=False)
class GridField:
    """Scalar field sampled at every point of ``grid``."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.size,):
            raise GridMismatchError(
                f"Field has {values.shape} samples, grid has {self.grid.size} points."
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def is_zero(self) -> bool:
        return not np.any(self.values)
