"""
Scalar modes.

``exact`` scalars are sympy expressions (rationals and polynomials in pi,
plus square roots after orthonormalization); ``float`` scalars are Python
floats. Every TrigPoly and FunctionSpace carries its mode.
"""

import math
import warnings
from fractions import Fraction
from typing import Literal, Union

import sympy as sp

ScalarMode = Literal["exact", "float"]
Scalar = Union[sp.Expr, float]

MODES = ("exact", "float")


class LossyCoefficientWarning(UserWarning):
    """An exact coefficient was rounded to a binary float."""


def check_mode(mode: str) -> str:
    if mode not in MODES:
        raise ValueError(f"Unknown scalar mode: {mode}. Use 'exact' or 'float'.")
    return mode


def parse_rational(text: str) -> Fraction:
    """Parse ``"p/q"`` or ``"p"`` into a Fraction."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"Invalid rational coefficient: {text!r}") from exc


def to_scalar(value, mode: ScalarMode) -> Scalar:
    if mode == "exact":
        if isinstance(value, sp.Basic):
            return sp.expand(value)
        if isinstance(value, bool):
            raise TypeError("Booleans are not scalars.")
        if isinstance(value, int):
            return sp.Integer(value)
        if isinstance(value, Fraction):
            return sp.Rational(value.numerator, value.denominator)
        if isinstance(value, float):
            return sp.Rational(Fraction(value))
        if isinstance(value, str):
            return sp.expand(sp.sympify(value))
        raise TypeError(f"Cannot convert {type(value).__name__} to an exact scalar.")
    check_mode(mode)
    if isinstance(value, str):
        try:
            return float(parse_rational(value))
        except ValueError:
            return float(sp.sympify(value))
    return float(value)


def to_float(value: Scalar) -> float:
    return float(value)


def lossy_to_float(text: str) -> float:
    """Convert a rational string in float mode, warning when rounding happens."""
    frac = parse_rational(text)
    value = float(frac)
    if Fraction(value) != frac:
        warnings.warn(
            f"Coefficient {text} is not representable in binary float; using {value!r}.",
            LossyCoefficientWarning,
            stacklevel=3,
        )
    return value


def two_pi(mode: ScalarMode) -> Scalar:
    return 2 * sp.pi if mode == "exact" else 2.0 * math.pi


def half(mode: ScalarMode) -> Scalar:
    return sp.Rational(1, 2) if mode == "exact" else 0.5


def one(mode: ScalarMode) -> Scalar:
    return sp.Integer(1) if mode == "exact" else 1.0


def zero(mode: ScalarMode) -> Scalar:
    return sp.Integer(0) if mode == "exact" else 0.0


def sqrt(value: Scalar, mode: ScalarMode) -> Scalar:
    return sp.sqrt(value) if mode == "exact" else math.sqrt(value)


def normalize(value: Scalar, mode: ScalarMode) -> Scalar:
    return sp.expand(value) if mode == "exact" else float(value)


def is_zero(value: Scalar, mode: ScalarMode) -> bool:
    if mode != "exact":
        return value == 0
    expr = sp.expand(value)
    if expr == 0:
        return True
    decided = expr.is_zero
    if decided is not None:
        return bool(decided)
    # Undecided algebraic expressions: shrink the numerical window until it settles
    for digits in (30, 60, 120):
        magnitude = abs(complex(sp.N(expr, digits)))
        if magnitude > 10.0 ** (-(digits // 2)):
            return False
    return True
