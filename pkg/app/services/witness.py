"""
A smooth, non-analytic function on the circle whose jets at 1/n vanish below
order n and equal n! at order n, and the refutation of elliptic operators it
gives.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence, Union

from app.core.config import EngineConfig
from app.core.errors import InvalidInputError, WitnessRangeError
from app.models.expression import Affine, Expr, Mul, Plateau, Pow, Var
from app.models.jetseries import JetSeries
from app.models.trigpoly import TrigPoly
from app.services.bumps import circle_distance, wrapped_difference
from app.services.funcspace import trig_eval

logger = logging.getLogger(__name__)

CERTIFICATE_SLACK = 1e-9


@dataclass(frozen=True)
class Piece:
    n: int
    center: Fraction
    half_width: float
    expr: Expr  # in the local variable d = x - center (wrapped)


@dataclass(frozen=True)
class Counterexample:
    pieces: tuple

    @property
    def n_max(self) -> int:
        return self.pieces[-1].n

    def piece(self, n: int) -> Piece:
        return self.pieces[n - 2]

    def __call__(self, x: float) -> float:
        total = 0.0
        for piece in self.pieces:
            d = wrapped_difference(x, float(piece.center))
            if abs(d) < piece.half_width:
                total += piece.expr.value(d)
        return total


@dataclass(frozen=True)
class Refutation:
    order: int
    value: float
    leading: float
    bound: float
    certified: bool


def jet_arith(expr: Expr, point: float, order: int) -> JetSeries:
    if order < 0:
        raise InvalidInputError("Jet order must be non-negative.")
    return expr.jet(point, order)


def bump_layout(n_max: int) -> list[tuple]:
    """(n, a_n, eps_n) with eps_n a third of the gap to the nearest other center."""
    centers = {n: Fraction(1, n) for n in range(2, n_max + 1)}
    layout = []
    for n, a in centers.items():
        gap = min(float(circle_distance(float(a), float(b))) for m, b in centers.items() if m != n) if n_max > 2 else 0.5
        layout.append((n, a, gap / 3.0))
    return layout


def build_counterexample(n_max: int) -> Counterexample:
    """f(x) = sum_{n=2}^{n_max} B((x - a_n)/eps_n) (x - a_n)^n."""
    if not 2 <= n_max <= EngineConfig.WITNESS_MAX_N:
        raise WitnessRangeError(f"n_max must lie in 2..{EngineConfig.WITNESS_MAX_N}, got {n_max}.")
    pieces = []
    for n, a, eps in bump_layout(n_max):
        local = Var()
        expr = Mul(Plateau(Affine(local, 1.0 / eps)), Pow(local, n))
        pieces.append(Piece(n, a, eps, expr))
    logger.info("Built counterexample with %d bumps", len(pieces))
    return Counterexample(tuple(pieces))


def jets_at(f: Counterexample, x: float, order: int) -> JetSeries:
    """Sum of piece jets whose support contains x; the zero jet elsewhere."""
    total = JetSeries.zero(float(x), order)
    for piece in f.pieces:
        d = wrapped_difference(float(x), float(piece.center))
        if abs(d) >= piece.half_width:
            continue
        local = piece.expr.jet(d, order)
        total = total + JetSeries(float(x), local.coeffs)
    return total


Coefficient = Union[float, int, TrigPoly, Callable[[float], float]]


def _coefficient_value(coeff: Coefficient, x: float) -> float:
    if isinstance(coeff, TrigPoly):
        return trig_eval(coeff, (x,))
    if callable(coeff):
        return float(coeff(x))
    return float(coeff)


def refute_operator(order: int, coeffs: Sequence[Coefficient], f: Counterexample) -> Refutation:
    """
    E f(1/d) = sum_k a_k(1/d) f^(k)(1/d) = a_d(1/d) d!, since the lower jets of
    f vanish at 1/d; certified against |a_d(1/d)| d! (1 - 1e-9).
    """
    if not 2 <= order <= f.n_max:
        raise WitnessRangeError(f"Operator order must lie in 2..{f.n_max}, got {order}.")
    if len(coeffs) != order + 1:
        raise InvalidInputError(f"Need {order + 1} coefficients a_0..a_{order}, got {len(coeffs)}.")
    x = 1.0 / order
    values = [_coefficient_value(c, x) for c in coeffs]
    if values[-1] == 0:
        raise InvalidInputError(f"Leading coefficient vanishes at x=1/{order}; the operator is not elliptic.")
    derivatives = jets_at(f, x, order).derivatives()
    value = sum(a * d for a, d in zip(values, derivatives))
    bound = abs(values[-1]) * math.factorial(order) * (1.0 - CERTIFICATE_SLACK)
    return Refutation(order, value, values[-1], bound, abs(value) >= bound)


def richardson_derivative(
    func: Callable[[float], float],
    x: float,
    order: int,
    h: float,
) -> float:
    """
    Central difference of the given order, Richardson-extrapolated:
    (4 D(h/2) - D(h)) / 3.
    """
    if order < 0:
        raise InvalidInputError("Derivative order must be non-negative.")
    if order == 0:
        return float(func(x))

    def central(step: float) -> float:
        total = 0.0
        for i in range(order + 1):
            total += (-1) ** i * math.comb(order, i) * func(x + (order / 2 - i) * step)
        return total / step ** order

    return (4.0 * central(h / 2) - central(h)) / 3.0


def default_step(f: Counterexample, x: float, order: int) -> float:
    """eps/(4 order) for the bump containing x, falling back to the smallest bump."""
    for piece in f.pieces:
        if abs(wrapped_difference(x, float(piece.center))) < piece.half_width:
            return piece.half_width / (4 * max(order, 1))
    return min(p.half_width for p in f.pieces) / (4 * max(order, 1))


def witness_jets(f: Counterexample, order_slack: int = 0) -> dict:
    """Derivatives f^(0..n)(1/n) for every bump."""
    return {piece.n: jets_at(f, 1.0 / piece.n, piece.n + order_slack).derivatives() for piece in f.pieces}
