"""
Truncated Taylor expansions  f(a + h) = sum_{j<=K} t_j h^j + O(h^{K+1}).
"""

import math
from dataclasses import dataclass
from typing import Union


@dataclass(frozen=True)
class JetSeries:
    point: float
    coeffs: tuple

    @classmethod
    def constant(cls, point: float, value: float, order: int) -> "JetSeries":
        return cls(point, (float(value),) + (0.0,) * order)

    @classmethod
    def variable(cls, point: float, order: int, value: float = None) -> "JetSeries":
        value = point if value is None else value
        if order == 0:
            return cls(point, (float(value),))
        return cls(point, (float(value), 1.0) + (0.0,) * (order - 1))

    @classmethod
    def zero(cls, point: float, order: int) -> "JetSeries":
        return cls(point, (0.0,) * (order + 1))

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def value(self) -> float:
        return self.coeffs[0]

    def derivatives(self) -> list[float]:
        return [math.factorial(j) * t for j, t in enumerate(self.coeffs)]

    def derivative(self, j: int) -> float:
        return math.factorial(j) * self.coeffs[j]

    def _lift(self, other: Union["JetSeries", float]) -> "JetSeries":
        if isinstance(other, JetSeries):
            if other.order != self.order:
                raise ValueError("Jet orders differ.")
            return other
        return JetSeries.constant(self.point, other, self.order)

    def __add__(self, other) -> "JetSeries":
        other = self._lift(other)
        return JetSeries(self.point, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __neg__(self) -> "JetSeries":
        return self.scale(-1.0)

    def __sub__(self, other) -> "JetSeries":
        return self + (-self._lift(other))

    def scale(self, factor: float) -> "JetSeries":
        return JetSeries(self.point, tuple(factor * t for t in self.coeffs))

    def affine(self, alpha: float, beta: float) -> "JetSeries":
        """alpha * self + beta"""
        shifted = self.scale(alpha).coeffs
        return JetSeries(self.point, (shifted[0] + beta,) + shifted[1:])

    def __mul__(self, other) -> "JetSeries":
        if not isinstance(other, JetSeries):
            return self.scale(float(other))
        other = self._lift(other)
        u, v = self.coeffs, other.coeffs
        product = tuple(sum(u[j] * v[k - j] for j in range(k + 1)) for k in range(len(u)))
        return JetSeries(self.point, product)

    __rmul__ = __mul__

    def exp(self) -> "JetSeries":
        u = self.coeffs
        e = [math.exp(u[0])]
        for k in range(1, len(u)):
            e.append(sum(j * u[j] * e[k - j] for j in range(1, k + 1)) / k)
        return JetSeries(self.point, tuple(e))

    def reciprocal(self) -> "JetSeries":
        u = self.coeffs
        if u[0] == 0:
            raise ValueError("Reciprocal of a jet with zero constant term.")
        r = [1.0 / u[0]]
        for k in range(1, len(u)):
            r.append(-sum(u[j] * r[k - j] for j in range(1, k + 1)) / u[0])
        return JetSeries(self.point, tuple(r))

    def power(self, n: int) -> "JetSeries":
        if n < 0:
            return self.reciprocal().power(-n)
        result = JetSeries.constant(self.point, 1.0, self.order)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result
