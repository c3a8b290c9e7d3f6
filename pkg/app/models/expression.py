"""
Expression trees over one real variable, evaluated either as floats or as
truncated Taylor jets.
"""

import math
from dataclasses import dataclass

from app.core.errors import KinkError
from app.models.jetseries import JetSeries


class Expr:
    def value(self, x: float) -> float:
        raise NotImplementedError

    def jet(self, point: float, order: int) -> JetSeries:
        raise NotImplementedError

    def __add__(self, other: "Expr") -> "Expr":
        return Add(self, _wrap(other))

    def __mul__(self, other: "Expr") -> "Expr":
        return Mul(self, _wrap(other))

    def __pow__(self, n: int) -> "Expr":
        return Pow(self, n)


def _wrap(value) -> Expr:
    return value if isinstance(value, Expr) else Const(float(value))


@dataclass(frozen=True)
class Const(Expr):
    c: float

    def value(self, x: float) -> float:
        return self.c

    def jet(self, point: float, order: int) -> JetSeries:
        return JetSeries.constant(point, self.c, order)


@dataclass(frozen=True)
class Var(Expr):
    def value(self, x: float) -> float:
        return x

    def jet(self, point: float, order: int) -> JetSeries:
        return JetSeries.variable(point, order)


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr

    def value(self, x: float) -> float:
        return self.left.value(x) + self.right.value(x)

    def jet(self, point: float, order: int) -> JetSeries:
        return self.left.jet(point, order) + self.right.jet(point, order)


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr

    def value(self, x: float) -> float:
        return self.left.value(x) * self.right.value(x)

    def jet(self, point: float, order: int) -> JetSeries:
        return self.left.jet(point, order) * self.right.jet(point, order)


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    n: int

    def value(self, x: float) -> float:
        return self.base.value(x) ** self.n

    def jet(self, point: float, order: int) -> JetSeries:
        return self.base.jet(point, order).power(self.n)


@dataclass(frozen=True)
class Exp(Expr):
    arg: Expr

    def value(self, x: float) -> float:
        return math.exp(self.arg.value(x))

    def jet(self, point: float, order: int) -> JetSeries:
        return self.arg.jet(point, order).exp()


@dataclass(frozen=True)
class Recip(Expr):
    arg: Expr

    def value(self, x: float) -> float:
        return 1.0 / self.arg.value(x)

    def jet(self, point: float, order: int) -> JetSeries:
        return self.arg.jet(point, order).reciprocal()


@dataclass(frozen=True)
class Affine(Expr):
    """scale * arg + shift"""

    arg: Expr
    scale: float
    shift: float = 0.0

    def value(self, x: float) -> float:
        return self.scale * self.arg.value(x) + self.shift

    def jet(self, point: float, order: int) -> JetSeries:
        return self.arg.jet(point, order).affine(self.scale, self.shift)


@dataclass(frozen=True)
class Abs(Expr):
    arg: Expr

    def value(self, x: float) -> float:
        return abs(self.arg.value(x))

    def jet(self, point: float, order: int) -> JetSeries:
        inner = self.arg.jet(point, order)
        if inner.value == 0:
            raise KinkError(f"|.| is not differentiable where its argument vanishes (x={point}).")
        return inner if inner.value > 0 else -inner


@dataclass(frozen=True)
class Flat(Expr):
    """exp(-1/u) for u > 0, else 0."""

    arg: Expr

    def value(self, x: float) -> float:
        u = self.arg.value(x)
        return math.exp(-1.0 / u) if u > 0 else 0.0

    def jet(self, point: float, order: int) -> JetSeries:
        inner = self.arg.jet(point, order)
        if inner.value <= 0:
            return JetSeries.zero(point, order)
        return inner.reciprocal().scale(-1.0).exp()


def smooth_step(u: Expr) -> Expr:
    """0 for u <= 0, 1 for u >= 1, smooth in between."""
    rising = Flat(u)
    return Mul(rising, Recip(Add(rising, Flat(Affine(u, -1.0, 1.0)))))


@dataclass(frozen=True)
class Plateau(Expr):
    """1 on |t| <= 1/2, 0 on |t| >= 1, smooth step s(2(1 - |t|)) between."""

    arg: Expr

    @property
    def transition(self) -> Expr:
        return smooth_step(Affine(Abs(self.arg), -2.0, 2.0))

    def value(self, x: float) -> float:
        t = abs(self.arg.value(x))
        if t <= 0.5:
            return 1.0
        if t >= 1.0:
            return 0.0
        return self.transition.value(x)

    def jet(self, point: float, order: int) -> JetSeries:
        t = abs(self.arg.value(point))
        if t <= 0.5:
            return JetSeries.constant(point, 1.0, order)
        if t >= 1.0:
            return JetSeries.zero(point, order)
        return self.transition.jet(point, order)
