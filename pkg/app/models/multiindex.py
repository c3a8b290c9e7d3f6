from dataclasses import dataclass
from functools import total_ordering
from itertools import product
from math import comb
from typing import Sequence


@total_ordering
@dataclass(frozen=True)
class MultiIndex:
    """
    Multi-index I = (i_1, ..., i_n) naming the partial derivative d^I.

    Ordering is graded lexicographic: total degree first, then lexicographic
    with axis 0 most significant, so (1, 0) (d/dx) comes before (0, 1) (d/dy).
    """

    entries: tuple

    def __post_init__(self):
        entries = tuple(int(e) for e in self.entries)
        if not entries:
            raise ValueError("Multi-index must have at least one entry.")
        if any(e < 0 for e in entries):
            raise ValueError(f"Multi-index entries must be non-negative: {entries}")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def zero(cls, dimension: int) -> "MultiIndex":
        return cls((0,) * dimension)

    @classmethod
    def unit(cls, dimension: int, axis: int) -> "MultiIndex":
        if not 0 <= axis < dimension:
            raise ValueError(f"Axis {axis} out of range for dimension {dimension}.")
        return cls(tuple(1 if a == axis else 0 for a in range(dimension)))

    @property
    def dimension(self) -> int:
        return len(self.entries)

    @property
    def degree(self) -> int:
        return sum(self.entries)

    def sort_key(self) -> tuple:
        return (self.degree, tuple(-e for e in self.entries))

    def __lt__(self, other: "MultiIndex") -> bool:
        if not isinstance(other, MultiIndex):
            return NotImplemented
        return self.sort_key() < other.sort_key()

    def bump(self, axis: int) -> "MultiIndex":
        entries = list(self.entries)
        entries[axis] += 1
        return MultiIndex(tuple(entries))

    def axes(self) -> list[int]:
        """Axes to differentiate along, in order, to realize d^I."""
        return [a for a, e in enumerate(self.entries) for _ in range(e)]

    def monomial(self, xi: Sequence[float]) -> float:
        value = 1.0
        for x, e in zip(xi, self.entries):
            value *= x ** e
        return value

    def __str__(self) -> str:
        return "(" + ",".join(str(e) for e in self.entries) + ")"


def multi_indices_of_degree(dimension: int, degree: int) -> list[MultiIndex]:
    found = [
        MultiIndex(entries)
        for entries in product(range(degree + 1), repeat=dimension)
        if sum(entries) == degree
    ]
    return sorted(found)


def multi_indices(dimension: int, order: int) -> list[MultiIndex]:
    """All multi-indices with |I| <= order in graded-lex order; C(n+k, n) of them."""
    if order < 0:
        raise ValueError("Order must be non-negative.")
    indices = []
    for degree in range(order + 1):
        indices.extend(multi_indices_of_degree(dimension, degree))
    assert len(indices) == comb(dimension + order, dimension)
    return indices
