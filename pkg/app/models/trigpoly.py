"""
Trigonometric polynomials on the unit torus [0,1)^n.

A term ``((m_1, ..., m_n), phase) -> c`` stands for ``c * phase(2*pi*<m, x>)``.
Instances are always kept in canonical form, see ``canonical_terms``.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Literal

import numpy as np

from app.core.errors import DimensionMismatchError, ModeMismatchError
from app.core.scalars import Scalar, ScalarMode, check_mode, is_zero, normalize, to_float, to_scalar

Phase = Literal["cos", "sin"]
TermKey = tuple  # (freq tuple, phase)

PHASES = ("cos", "sin")


def _flip(freq: tuple) -> bool:
    for m in freq:
        if m != 0:
            return m < 0
    return False


def canonical_terms(items: Iterable, dimension: int, mode: ScalarMode) -> tuple:
    """
    Merge ``(freq, phase, coeff)`` triples into canonical sorted terms.

    sin terms at zero frequency vanish; a frequency whose first nonzero entry
    is negative is negated (cos is even, sin is odd); zero coefficients are
    dropped.
    """
    merged: dict = {}
    for freq, phase, coeff in items:
        freq = tuple(int(m) for m in freq)
        if len(freq) != dimension:
            raise DimensionMismatchError(dimension, len(freq), "frequency vector")
        if phase not in PHASES:
            raise ValueError(f"Unknown phase: {phase}")
        coeff = to_scalar(coeff, mode)
        if phase == "sin" and not any(freq):
            continue
        if _flip(freq):
            freq = tuple(-m for m in freq)
            if phase == "sin":
                coeff = -coeff
        key = (freq, phase)
        merged[key] = merged[key] + coeff if key in merged else coeff
    terms = []
    for key in sorted(merged):
        value = normalize(merged[key], mode)
        if not is_zero(value, mode):
            terms.append((key, value))
    return tuple(terms)


@dataclass(frozen=True, eq=False)
class TrigPoly:
    dimension: int
    terms: tuple  # ((freq, phase), coeff) pairs, sorted by key
    mode: ScalarMode = "float"

    @classmethod
    def from_terms(cls, dimension: int, items: Iterable, mode: ScalarMode = "float") -> "TrigPoly":
        check_mode(mode)
        return cls(dimension, canonical_terms(items, dimension, mode), mode)

    @classmethod
    def zero(cls, dimension: int, mode: ScalarMode = "float") -> "TrigPoly":
        return cls(dimension, (), mode)

    @classmethod
    def constant(cls, value, dimension: int, mode: ScalarMode = "float") -> "TrigPoly":
        return cls.from_terms(dimension, [((0,) * dimension, "cos", value)], mode)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def keys(self) -> tuple:
        return tuple(key for key, _ in self.terms)

    def as_dict(self) -> dict:
        return dict(self.terms)

    def coefficient(self, freq: tuple, phase: Phase = "cos") -> Scalar:
        return self.as_dict().get((tuple(freq), phase), to_scalar(0, self.mode))

    def items(self) -> list:
        return [(freq, phase, coeff) for (freq, phase), coeff in self.terms]

    @property
    def max_frequency(self) -> int:
        return max((max(abs(m) for m in freq) for (freq, _), _ in self.terms), default=0)

    def _check(self, other: "TrigPoly") -> None:
        if self.dimension != other.dimension:
            raise DimensionMismatchError(self.dimension, other.dimension)
        if self.mode != other.mode:
            raise ModeMismatchError(self.mode, other.mode)

    def __add__(self, other: "TrigPoly") -> "TrigPoly":
        self._check(other)
        return TrigPoly.from_terms(self.dimension, self.items() + other.items(), self.mode)

    def __neg__(self) -> "TrigPoly":
        return self.scale(-1)

    def __sub__(self, other: "TrigPoly") -> "TrigPoly":
        return self + (-other)

    def scale(self, factor) -> "TrigPoly":
        factor = to_scalar(factor, self.mode)
        return TrigPoly.from_terms(
            self.dimension, [(f, p, factor * c) for f, p, c in self.items()], self.mode
        )

    def to_mode(self, mode: ScalarMode) -> "TrigPoly":
        if mode == self.mode:
            return self
        if mode == "float":
            return TrigPoly.from_terms(self.dimension, [(f, p, to_float(c)) for f, p, c in self.items()], mode)
        return TrigPoly.from_terms(self.dimension, self.items(), mode)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TrigPoly):
            return NotImplemented
        if self.dimension != other.dimension or self.keys != other.keys:
            return False
        mode = self.mode if self.mode == other.mode else "float"
        return all(
            is_zero(a - b, mode) if mode == "exact" else float(a) == float(b)
            for (_, a), (_, b) in zip(self.terms, other.terms)
        )

    def __hash__(self) -> int:
        return hash((self.dimension, self.keys))

    @cached_property
    def float_arrays(self) -> tuple:
        """(frequencies (T, n), sin mask (T,), coefficients (T,)) for vectorized evaluation."""
        if not self.terms:
            return np.zeros((0, self.dimension)), np.zeros(0, dtype=bool), np.zeros(0)
        freqs = np.array([freq for (freq, _), _ in self.terms], dtype=float)
        is_sin = np.array([phase == "sin" for (_, phase), _ in self.terms])
        coeffs = np.array([to_float(c) for _, c in self.terms])
        return freqs, is_sin, coeffs

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for (freq, phase), coeff in self.terms:
            if not any(freq):
                parts.append(f"{coeff}")
            else:
                arg = "+".join(f"{m}*x{a}" for a, m in enumerate(freq) if m)
                parts.append(f"{coeff}*{phase}(2*pi*({arg}))")
        return " + ".join(parts)
