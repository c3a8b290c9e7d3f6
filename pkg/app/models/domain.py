from dataclasses import dataclass

from app.core.errors import InvalidInputError
from app.core.scalars import ScalarMode
from app.models.trigpoly import TrigPoly

# One TrigPoly per torus component
DomainFunction = tuple


@dataclass(frozen=True)
class Domain:
    """Disjoint union of ``len(components)`` flat unit tori of equal dimension."""

    components: tuple

    def __post_init__(self):
        components = tuple(int(n) for n in self.components)
        if not components:
            raise InvalidInputError("Domain needs at least one component.")
        if len(set(components)) != 1:
            raise InvalidInputError(f"All components must share one dimension, got {components}.")
        if components[0] not in (1, 2, 3):
            raise InvalidInputError(f"Unsupported torus dimension: {components[0]}.")
        object.__setattr__(self, "components", components)

    @classmethod
    def torus(cls, dimension: int, count: int = 1) -> "Domain":
        return cls((dimension,) * count)

    @property
    def dimension(self) -> int:
        return self.components[0]

    @property
    def count(self) -> int:
        return len(self.components)


@dataclass(frozen=True, eq=False)
class FunctionSpace:
    """
    Ordered basis f_1..f_N of S. ``basis[i][c]`` is f_{i+1} on component c.

    Build through ``services.funcspace.make_space`` so independence is checked.
    """

    domain: Domain
    basis: tuple
    mode: ScalarMode = "float"

    @property
    def size(self) -> int:
        return len(self.basis)

    @property
    def dimension(self) -> int:
        return self.domain.dimension

    def component(self, c: int) -> list[TrigPoly]:
        return [f[c] for f in self.basis]

    def max_frequency(self) -> int:
        return max((p.max_frequency for f in self.basis for p in f), default=0)
