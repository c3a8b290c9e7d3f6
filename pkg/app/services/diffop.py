import logging
import math
from typing import Optional, Sequence, Union

import numpy as np

from app.core.config import EngineConfig, get_settings
from app.core.errors import DimensionMismatchError, GridMismatchError, InvalidInputError
from app.core.scalars import to_float, to_scalar
from app.models.diffop import Analytic, Coefficient, Constant, DiffOp, Sampled
from app.models.domain import DomainFunction
from app.models.grid import GridField, GridPoint, GridSpec
from app.models.multiindex import MultiIndex, multi_indices_of_degree
from app.models.trigpoly import TrigPoly
from app.schemas.report import SymbolReport
from app.services.funcspace import partial_multi, trig_eval_many, trig_mul

logger = logging.getLogger(__name__)


def _as_function(f: Union[TrigPoly, DomainFunction]) -> DomainFunction:
    return (f,) if isinstance(f, TrigPoly) else tuple(f)


def apply(op: DiffOp, f: Union[TrigPoly, DomainFunction]):
    """
    sum_I c_I d^I f. TrigPoly (or a tuple per component) when every coefficient is
    Constant/Analytic; otherwise a GridField of pointwise values on the operator grid.
    """
    single = isinstance(f, TrigPoly)
    parts = _as_function(f)
    if len(parts) != op.components:
        raise DimensionMismatchError(op.components, len(parts), "function components")
    for p in parts:
        if p.dimension != op.dimension:
            raise DimensionMismatchError(op.dimension, p.dimension, "function")
    if not op.is_analytic:
        return GridField(op.grid, apply_on_grid(op, parts, op.grid))
    result = []
    for c, p in enumerate(parts):
        total = TrigPoly.zero(p.dimension, p.mode)
        for index, coeff in op.terms:
            derivative = partial_multi(p, index)
            if isinstance(coeff, Constant):
                total = total + derivative.scale(to_scalar(coeff.value, p.mode))
            else:
                total = total + trig_mul(coeff.polys[c].to_mode(p.mode), derivative)
        result.append(total)
    return result[0] if single else tuple(result)


def coefficient_values(coeff: Coefficient, grid: GridSpec) -> np.ndarray:
    if isinstance(coeff, Constant):
        return np.full(grid.size, to_float(coeff.value))
    if isinstance(coeff, Analytic):
        values = np.empty(grid.size)
        for c, poly in enumerate(coeff.polys):
            part = grid.component_slice(c)
            values[part] = trig_eval_many(poly, grid.coordinates[part])
        return values
    coeff.grid.check_same(grid)
    return np.asarray(coeff.field.values)


def function_values(f: DomainFunction, grid: GridSpec, index: Optional[MultiIndex] = None) -> np.ndarray:
    """d^I f on every grid point, component by component."""
    values = np.empty(grid.size)
    for c, poly in enumerate(f):
        part = grid.component_slice(c)
        target = poly if index is None else partial_multi(poly, index)
        values[part] = trig_eval_many(target, grid.coordinates[part])
    return values


def apply_on_grid(op: DiffOp, f: Union[TrigPoly, DomainFunction], grid: GridSpec) -> np.ndarray:
    """Pointwise sum_I c_I(x) d^I f(x) at every grid point."""
    parts = _as_function(f)
    if grid.dimension != op.dimension or grid.components != op.components:
        raise GridMismatchError("Grid does not match the operator domain.")
    if op.grid is not None:
        op.grid.check_same(grid)
    total = np.zeros(grid.size)
    for index, coeff in op.terms:
        total += coefficient_values(coeff, grid) * function_values(parts, grid, index)
    return total


def _coefficient_at(coeff: Coefficient, point: GridPoint) -> float:
    if isinstance(coeff, Constant):
        return to_float(coeff.value)
    if isinstance(coeff, Analytic):
        return float(trig_eval_many(coeff.polys[point.component], np.asarray([point.as_floats()]))[0])
    return float(coeff.field.values[coeff.grid.index_of(point)])


def principal_symbol(op: DiffOp, point: Union[GridPoint, Sequence], xi: Sequence[float]) -> float:
    """Real symbol sum_{|I|=d} c_I(x) xi^I."""
    if not isinstance(point, GridPoint):
        point = GridPoint(0, tuple(point))
    if len(xi) != op.dimension:
        raise DimensionMismatchError(op.dimension, len(xi), "direction")
    return sum(_coefficient_at(coeff, point) * index.monomial(xi) for index, coeff in op.leading_terms())


def sphere_directions(dimension: int, samples: int) -> np.ndarray:
    """Deterministic unit directions: {-1, +1} on the line, equispaced angles on the circle, a Fibonacci lattice in 3-d."""
    if samples < 2:
        raise InvalidInputError("Need at least two sphere samples.")
    if dimension == 1:
        return np.array([[-1.0], [1.0]])
    if dimension == 2:
        angles = 2.0 * np.pi * np.arange(samples) / samples
        return np.column_stack([np.cos(angles), np.sin(angles)])
    i = np.arange(samples) + 0.5
    z = 1.0 - 2.0 * i / samples
    radius = np.sqrt(1.0 - z * z)
    phi = np.pi * (3.0 - math.sqrt(5.0)) * i
    return np.column_stack([radius * np.cos(phi), radius * np.sin(phi), z])


def ellipticity_check(
    op: DiffOp,
    grid: GridSpec,
    sphere_samples: Optional[int] = None,
    margin: Optional[float] = None,
) -> SymbolReport:
    """min |symbol| over grid x sphere samples; passes iff the minimum exceeds the margin."""
    sphere_samples = sphere_samples or EngineConfig.SPHERE_SAMPLES[op.dimension]
    margin = get_settings().elliptic_margin if margin is None else margin
    directions = sphere_directions(op.dimension, sphere_samples)
    symbol = np.zeros((grid.size, len(directions)))
    for index, coeff in op.leading_terms():
        monomials = np.array([index.monomial(xi) for xi in directions])
        symbol += coefficient_values(coeff, grid)[:, None] * monomials[None, :]
    modulus = np.abs(symbol)
    flat = int(np.argmin(modulus))
    p, d = divmod(flat, len(directions))
    point = grid.point(p)
    minimum = float(modulus[p, d])
    return SymbolReport(
        min_modulus=minimum,
        point=[str(c) for c in point.coords],
        component=point.component,
        direction=[float(v) for v in directions[d]],
        grid_points=grid.size,
        sphere_samples=len(directions),
        margin=margin,
        passed=minimum > margin,
        order=op.order,
    )


def laplacian_power(dimension: int, p: int, mode: str = "float") -> DiffOp:
    """(sum_i d_i^2)^p expanded by the multinomial theorem."""
    if p < 1:
        raise InvalidInputError("Laplacian power must be at least 1.")
    terms = {}
    for alpha in multi_indices_of_degree(dimension, p):
        weight = math.factorial(p)
        for a in alpha.entries:
            weight //= math.factorial(a)
        terms[MultiIndex(tuple(2 * a for a in alpha.entries))] = Constant(weight)
    return DiffOp.from_terms(dimension, terms, mode=mode)


def reference_operator(dimension: int, order: int, components: int = 1, mode: str = "float", negate: bool = False) -> DiffOp:
    """Elliptic reference: Laplacian power for even orders, d^order on the circle for odd ones."""
    if order < 1:
        raise InvalidInputError("Elliptic order must be positive.")
    if order % 2 == 0:
        base = laplacian_power(dimension, order // 2, mode)
    elif dimension == 1:
        base = DiffOp.from_terms(1, {MultiIndex((order,)): Constant(1)}, mode=mode)
    else:
        raise InvalidInputError(f"Odd elliptic order {order} is only available on the circle.")
    sign = -1 if negate else 1
    return DiffOp.from_terms(
        dimension,
        [(index, Constant(sign * coeff.value)) for index, coeff in base.terms],
        components,
        mode,
    )


def add_coefficients(a: Optional[Coefficient], b: Optional[Coefficient], grid: Optional[GridSpec], mode: str) -> Coefficient:
    """a + b, staying Constant/Analytic when both are; Sampled otherwise."""
    if a is None:
        return b
    if b is None:
        return a
    if isinstance(a, Constant) and isinstance(b, Constant):
        return Constant(to_scalar(a.value, mode) + to_scalar(b.value, mode))
    if not isinstance(a, Sampled) and not isinstance(b, Sampled):
        polys_a = _as_polys(a, b, mode)
        polys_b = _as_polys(b, a, mode)
        return Analytic(tuple(p + q for p, q in zip(polys_a, polys_b)))
    target = a.grid if isinstance(a, Sampled) else b.grid
    if grid is not None:
        target.check_same(grid)
    return Sampled(GridField(target, coefficient_values(a, target) + coefficient_values(b, target)))


def _as_polys(coeff: Coefficient, other: Analytic, mode: str) -> tuple:
    if isinstance(coeff, Analytic):
        return tuple(p.to_mode(mode) for p in coeff.polys)
    polys = other.polys
    return tuple(TrigPoly.constant(coeff.value, p.dimension, mode) for p in polys)


def negate_coefficient(coeff: Coefficient, mode: str) -> Coefficient:
    if isinstance(coeff, Constant):
        return Constant(-to_scalar(coeff.value, mode))
    if isinstance(coeff, Analytic):
        return Analytic(tuple(-p for p in coeff.polys))
    return Sampled(GridField(coeff.grid, -np.asarray(coeff.field.values)))


def subtract_lower_order(op: DiffOp, corrections) -> DiffOp:
    """op - sum_I corrections[I] d^I; corrections must stay below the order of op."""
    pairs = corrections.items() if isinstance(corrections, dict) else corrections
    terms = dict(op.terms)
    for index, coeff in pairs:
        if index.degree >= op.order and op.order > 0:
            raise InvalidInputError(f"Correction at {index} would touch the leading part.")
        terms[index] = add_coefficients(terms.get(index), negate_coefficient(coeff, op.mode), op.grid, op.mode)
    return DiffOp.from_terms(op.dimension, terms, op.components, op.mode)


def scale_operator(op: DiffOp, factor: float) -> DiffOp:
    terms = []
    for index, coeff in op.terms:
        if isinstance(coeff, Constant):
            terms.append((index, Constant(to_scalar(factor, op.mode) * coeff.value)))
        elif isinstance(coeff, Analytic):
            terms.append((index, Analytic(tuple(p.scale(factor) for p in coeff.polys))))
        else:
            terms.append((index, Sampled(GridField(coeff.grid, factor * np.asarray(coeff.field.values)))))
    return DiffOp.from_terms(op.dimension, terms, op.components, op.mode)


def collapse_constant_fields(op: DiffOp, tol: float) -> DiffOp:
    """Replace sampled coefficients whose spread is within tol (relative to their size) by Constants."""
    terms = []
    for index, coeff in op.terms:
        if isinstance(coeff, Sampled):
            values = np.asarray(coeff.field.values)
            scale = max(1.0, float(np.max(np.abs(values))))
            if float(np.ptp(values)) <= tol * scale:
                mean = float(np.mean(values))
                coeff = Constant(0.0 if abs(mean) <= tol * scale else mean)
        terms.append((index, coeff))
    return DiffOp.from_terms(op.dimension, terms, op.components, op.mode)


def residual_table(op: DiffOp, basis: Sequence[DomainFunction], grid: GridSpec) -> np.ndarray:
    """|P f_j(x)| as an (N, grid points) array."""
    return np.abs(np.array([apply_on_grid(op, f, grid) for f in basis]))
