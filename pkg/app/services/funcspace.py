import logging
import math
from fractions import Fraction
from typing import Sequence

import numpy as np
import sympy as sp

from app.core.errors import DependentBasisError, DimensionMismatchError, InvalidInputError
from app.core.scalars import ScalarMode, check_mode, half, is_zero, normalize, one, sqrt, to_scalar, two_pi, zero
from app.models.domain import Domain, DomainFunction, FunctionSpace
from app.models.multiindex import MultiIndex
from app.models.trigpoly import TrigPoly

logger = logging.getLogger(__name__)

DEPENDENCE_TOL = 1e-10


def trig_partial(f: TrigPoly, axis: int) -> TrigPoly:
    """Exact d/dx_axis: cos -> -2pi m_a sin, sin -> +2pi m_a cos."""
    if not 0 <= axis < f.dimension:
        raise InvalidInputError(f"Axis {axis} out of range for dimension {f.dimension}.")
    factor = two_pi(f.mode)
    items = []
    for freq, phase, coeff in f.items():
        m = freq[axis]
        if m == 0:
            continue
        if phase == "cos":
            items.append((freq, "sin", -factor * m * coeff))
        else:
            items.append((freq, "cos", factor * m * coeff))
    return TrigPoly.from_terms(f.dimension, items, f.mode)


def partial_multi(f: TrigPoly, index: MultiIndex) -> TrigPoly:
    if index.dimension != f.dimension:
        raise DimensionMismatchError(f.dimension, index.dimension, "multi-index")
    for axis in index.axes():
        f = trig_partial(f, axis)
    return f


def trig_mul(f: TrigPoly, g: TrigPoly) -> TrigPoly:
    """Exact product via product-to-sum identities."""
    if f.dimension != g.dimension:
        raise DimensionMismatchError(f.dimension, g.dimension)
    if f.mode != g.mode:
        g = g.to_mode(f.mode)
    h = half(f.mode)
    items = []
    for a, pa, ca in f.items():
        for b, pb, cb in g.items():
            c = h * ca * cb
            plus = tuple(x + y for x, y in zip(a, b))
            minus = tuple(x - y for x, y in zip(a, b))
            if pa == "cos" and pb == "cos":
                items += [(minus, "cos", c), (plus, "cos", c)]
            elif pa == "sin" and pb == "sin":
                items += [(minus, "cos", c), (plus, "cos", -c)]
            elif pa == "sin":
                items += [(plus, "sin", c), (minus, "sin", c)]
            else:
                items += [(plus, "sin", c), (minus, "sin", -c)]
    return TrigPoly.from_terms(f.dimension, items, f.mode)


def trig_eval(f: TrigPoly, x: Sequence) -> float:
    """Float value at x, also in exact mode."""
    if len(x) != f.dimension:
        raise DimensionMismatchError(f.dimension, len(x), "point")
    return float(trig_eval_many(f, np.asarray([x], dtype=float))[0])


def trig_eval_many(f: TrigPoly, coords: np.ndarray) -> np.ndarray:
    """Vectorized evaluation at the rows of a (P, n) coordinate array."""
    freqs, is_sin, coeffs = f.float_arrays
    if coeffs.size == 0:
        return np.zeros(coords.shape[0])
    angles = 2.0 * math.pi * (coords @ freqs.T)
    waves = np.where(is_sin[None, :], np.sin(angles), np.cos(angles))
    return waves @ coeffs


def trig_eval_exact(f: TrigPoly, x: Sequence) -> sp.Expr:
    """Symbolic value at a rational point (sympy evaluates cos/sin of rational multiples of pi where it can)."""
    point = [sp.Rational(Fraction(c).numerator, Fraction(c).denominator) for c in x]
    total = sp.Integer(0)
    for freq, phase, coeff in f.items():
        angle = 2 * sp.pi * sum(m * c for m, c in zip(freq, point))
        wave = sp.cos(angle) if phase == "cos" else sp.sin(angle)
        total += to_scalar(coeff, "exact") * wave
    return sp.expand(total)


def _l2_weight(freq: tuple, phase: str, mode: ScalarMode):
    return one(mode) if phase == "cos" and not any(freq) else half(mode)


def l2_inner(f: TrigPoly, g: TrigPoly):
    """Exact integral of f*g over the unit-volume torus."""
    if f.dimension != g.dimension:
        raise DimensionMismatchError(f.dimension, g.dimension)
    mode = f.mode if f.mode == g.mode else "float"
    other = g.to_mode(mode).as_dict()
    total = zero(mode)
    for (freq, phase), coeff in f.to_mode(mode).terms:
        if (freq, phase) in other:
            total += _l2_weight(freq, phase, mode) * coeff * other[(freq, phase)]
    return normalize(total, mode)


def space_inner(u: DomainFunction, v: DomainFunction, inner=l2_inner):
    """Sum of per-component inner products."""
    if len(u) != len(v):
        raise DimensionMismatchError(len(u), len(v), "component count")
    total = inner(u[0], v[0])
    for a, b in zip(u[1:], v[1:]):
        total += inner(a, b)
    return total


def gram_matrix(basis: Sequence[DomainFunction], mode: ScalarMode, inner=l2_inner):
    """Symmetric Gram matrix: sympy Matrix in exact mode, numpy array in float mode."""
    n = len(basis)
    entries = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            value = space_inner(basis[i], basis[j], inner)
            entries[i][j] = entries[j][i] = value
    if mode == "exact":
        return sp.Matrix(entries)
    return np.array(entries, dtype=float)


def combine(functions: Sequence[DomainFunction], weights: Sequence, mode: ScalarMode) -> DomainFunction:
    """sum_j weights[j] * functions[j], component-wise."""
    components = len(functions[0])
    dimension = functions[0][0].dimension
    result = []
    for c in range(components):
        items = []
        for f, w in zip(functions, weights):
            w = to_scalar(w, mode)
            items.extend((freq, phase, w * coeff) for freq, phase, coeff in f[c].to_mode(mode).items())
        result.append(TrigPoly.from_terms(dimension, items, mode))
    return tuple(result)


def _gram_schmidt(basis: Sequence[DomainFunction], mode: ScalarMode) -> list:
    """Modified Gram-Schmidt; raises DependentBasisError with the 1-based index of the first dependent element."""
    ortho: list = []
    for i, f in enumerate(basis):
        original = space_inner(f, f)
        v = f
        for u in ortho:
            v = combine([v, u], [one(mode), -space_inner(v, u)], mode)
        norm2 = space_inner(v, v)
        if mode == "exact":
            dependent = is_zero(norm2, mode)
        else:
            dependent = not norm2 > DEPENDENCE_TOL * max(float(original), 1e-300)
        if dependent:
            raise DependentBasisError(i + 1)
        v = combine([v], [one(mode) / sqrt(norm2, mode)], mode)
        ortho.append(v)
    return ortho


def make_space(domain: Domain, basis: Sequence[DomainFunction], mode: ScalarMode = "float") -> FunctionSpace:
    """Validate shapes and linear independence, then wrap as a FunctionSpace."""
    check_mode(mode)
    if not basis:
        raise InvalidInputError("A function space needs at least one basis function.")
    checked = []
    for f in basis:
        if isinstance(f, TrigPoly):
            f = (f,)
        if len(f) != domain.count:
            raise DimensionMismatchError(domain.count, len(f), "components per basis function")
        for p in f:
            if p.dimension != domain.dimension:
                raise DimensionMismatchError(domain.dimension, p.dimension, "basis function")
        checked.append(tuple(p.to_mode(mode) for p in f))
    _gram_schmidt(checked, mode)
    return FunctionSpace(domain, tuple(checked), mode)


def orthonormalize(space: FunctionSpace) -> FunctionSpace:
    """Gram-Schmidt against the summed L2 inner product; same span, identity Gram matrix."""
    ortho = _gram_schmidt(space.basis, space.mode)
    logger.debug("Orthonormalized %d basis functions (%s mode)", len(ortho), space.mode)
    return FunctionSpace(space.domain, tuple(ortho), space.mode)


def change_basis(space: FunctionSpace, matrix) -> FunctionSpace:
    """New basis g_i = sum_j matrix[i][j] f_j; must stay independent."""
    rows = [list(row) for row in (matrix.tolist() if hasattr(matrix, "tolist") else matrix)]
    if len(rows) != space.size or any(len(r) != space.size for r in rows):
        raise DimensionMismatchError(space.size, len(rows), "basis change matrix")
    basis = [combine(space.basis, row, space.mode) for row in rows]
    return make_space(space.domain, basis, space.mode)


def to_float_space(space: FunctionSpace) -> FunctionSpace:
    if space.mode == "float":
        return space
    basis = tuple(tuple(p.to_mode("float") for p in f) for f in space.basis)
    return FunctionSpace(space.domain, basis, "float")
