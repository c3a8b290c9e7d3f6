"""
Pointwise jet machinery: the functionals d^I evaluated at x on S, their rank
r(x), the annihilating relations, and elliptic completion at a single point.
"""

import logging
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np
import sympy as sp

from app.core.config import get_settings
from app.core.errors import InvalidInputError, SpanResidualError
from app.core.scalars import to_float, to_scalar
from app.models.diffop import Constant, DiffOp
from app.models.domain import FunctionSpace
from app.models.grid import GridPoint, GridSpec
from app.models.jets import Annihilator, FunctionalSpan, JetMatrix, PointwiseOperator
from app.models.multiindex import MultiIndex, multi_indices
from app.services import linalg
from app.services.diffop import apply, subtract_lower_order
from app.services.funcspace import trig_eval_exact, trig_eval_many, trig_partial

logger = logging.getLogger(__name__)

CLOSURE_TOL = 1e-9


class DerivativeTable:
    """Memoized d^I f_j for every basis function, built one axis at a time."""

    def __init__(self, space: FunctionSpace):
        self.space = space
        self._cache = {MultiIndex.zero(space.dimension): space.basis}
        self._grid_cache: dict = {}

    def derivative(self, index: MultiIndex) -> tuple:
        if index in self._cache:
            return self._cache[index]
        axis = next(a for a, e in enumerate(index.entries) if e > 0)
        entries = list(index.entries)
        entries[axis] -= 1
        parent = self.derivative(MultiIndex(tuple(entries)))
        result = tuple(tuple(trig_partial(p, axis) for p in f) for f in parent)
        self._cache[index] = result
        return result

    def grid_values(self, grid: GridSpec, order: int) -> np.ndarray:
        """(R, N, P) float array of d^I f_j(x) for |I| <= order."""
        key = (grid, order)
        if key not in self._grid_cache:
            indices = multi_indices(self.space.dimension, order)
            values = np.zeros((len(indices), self.space.size, grid.size))
            for r, index in enumerate(indices):
                for j, f in enumerate(self.derivative(index)):
                    for c, poly in enumerate(f):
                        part = grid.component_slice(c)
                        values[r, j, part] = trig_eval_many(poly, grid.coordinates[part])
            self._grid_cache[key] = values
        return self._grid_cache[key]


def _tuple_vector(functions: tuple, universe: dict, mode: str) -> list:
    row = [to_scalar(0, mode)] * len(universe)
    for j, f in enumerate(functions):
        for c, poly in enumerate(f):
            for key, coeff in poly.terms:
                row[universe[(j, c, key)]] = coeff
    return row


def _universe(space: FunctionSpace) -> dict:
    """Coordinates of the frequency-closed ambient space: (basis j, component c, (freq, phase))."""
    keys = []
    for j, f in enumerate(space.basis):
        for c, poly in enumerate(f):
            freqs = sorted({freq for (freq, _), _ in poly.terms})
            for freq in freqs:
                keys.append((j, c, (freq, "cos")))
                if any(freq):
                    keys.append((j, c, (freq, "sin")))
    return {key: position for position, key in enumerate(keys)}


def _span_rank(rows: list, mode: str) -> int:
    if not rows:
        return 0
    if mode == "exact":
        return linalg.exact_rank(sp.Matrix(rows))
    matrix = np.array(rows, dtype=float)
    scale = np.max(np.abs(matrix), axis=1, keepdims=True)
    scale[scale == 0] = 1.0
    return linalg.float_rank(matrix / scale, CLOSURE_TOL)


def jet_closure_order(space: FunctionSpace, table: Optional[DerivativeTable] = None) -> int:
    """
    Smallest k* with span T_{k*+1} = span T_{k*}, T_k the tuples (d^I f_1, ..., d^I f_N), |I| <= k.
    Stabilization is permanent because T_k is closed under differentiation once it stops growing.
    """
    table = table or DerivativeTable(space)
    universe = _universe(space)
    rows: list = []
    previous = None
    k = 0
    while True:
        for index in multi_indices(space.dimension, k):
            if index.degree == k:
                rows.append(_tuple_vector(table.derivative(index), universe, space.mode))
        rank = _span_rank(rows, space.mode)
        if previous is not None and rank == previous:
            logger.info("Jet closure order k*=%d (tuple span dimension %d)", k - 1, rank)
            return k - 1
        if k > len(universe) + 1:
            raise RuntimeError("Tuple span failed to stabilize.")
        previous = rank
        k += 1


def _as_point(point: Union[GridPoint, Sequence]) -> GridPoint:
    if isinstance(point, GridPoint):
        return point
    return GridPoint(0, tuple(point))


def _is_rational(point: GridPoint) -> bool:
    return all(isinstance(c, (int, Fraction)) for c in point.coords)


def jet_matrix(space: FunctionSpace, point: Union[GridPoint, Sequence], k: int, table: Optional[DerivativeTable] = None) -> JetMatrix:
    """Rows d^I (|I| <= k, graded-lex), columns f_1..f_N, evaluated at x."""
    if k < 0:
        raise InvalidInputError("Jet order must be non-negative.")
    point = _as_point(point)
    if len(point.coords) != space.dimension:
        raise InvalidInputError(f"Point {point} does not have {space.dimension} coordinates.")
    if not 0 <= point.component < space.domain.count:
        raise InvalidInputError(f"Component {point.component} does not exist.")
    table = table or DerivativeTable(space)
    indices = tuple(multi_indices(space.dimension, k))
    c = point.component
    if space.mode == "exact" and _is_rational(point):
        values = sp.Matrix([
            [trig_eval_exact(f[c], point.coords) for f in table.derivative(index)]
            for index in indices
        ])
        return JetMatrix(point, k, indices, values, "exact")
    coords = np.asarray([point.as_floats()])
    values = np.array([
        [trig_eval_many(f[c], coords)[0] for f in table.derivative(index)]
        for index in indices
    ])
    return JetMatrix(point, k, indices, values, "float")


def rank_and_annihilator(jets: JetMatrix, tol: Optional[float] = None) -> tuple:
    """
    r = rank J; annihilator = null space of J^T, i.e. every c with
    sum_I c_I d^I f_j(x) = 0 for all j. r + dim(annihilator) = rows.
    """
    tol = get_settings().rank_tol if tol is None else tol
    if jets.mode == "exact":
        rank = linalg.exact_rank(jets.values)
        vectors = linalg.exact_null_space(jets.values.T)
        vectors = tuple(tuple(v) for v in vectors)
    else:
        rank = linalg.float_rank(jets.values, tol)
        basis = linalg.float_null_space(jets.values.T, tol)
        vectors = tuple(tuple(float(x) for x in basis[:, i]) for i in range(basis.shape[1]))
    return rank, Annihilator(jets.indices, vectors, jets.mode)


def spanning_functionals(jets: JetMatrix, tol: Optional[float] = None) -> FunctionalSpan:
    """Greedy graded-lex row selection: keep d^I iff it raises the rank."""
    tol = get_settings().rank_tol if tol is None else tol
    chosen: list = []
    if jets.mode == "exact":
        for position, index in enumerate(jets.indices):
            candidate = [p for p, _ in chosen] + [position]
            rows = jets.values.extract(candidate, list(range(jets.values.shape[1])))
            if linalg.exact_rank(rows) > len(chosen):
                chosen.append((position, index))
        return FunctionalSpan(tuple(index for _, index in chosen))
    s = linalg.singular_values(jets.values)
    reference = float(s[0]) if s.size else 0.0
    for position, index in enumerate(jets.indices):
        candidate = [p for p, _ in chosen] + [position]
        if linalg.float_rank(jets.values[candidate], tol, reference) > len(chosen):
            chosen.append((position, index))
    return FunctionalSpan(tuple(index for _, index in chosen))


def operator_values_at(op: DiffOp, space: FunctionSpace, point: GridPoint, table: DerivativeTable, exact: bool):
    """(E f_j)(x) for every basis function."""
    c = point.component
    if exact:
        return [trig_eval_exact(apply(op, f)[c], point.coords) for f in space.basis]
    coords = np.asarray([point.as_floats()])
    values = np.zeros(space.size)
    for index, coeff in op.terms:
        if coeff.kind == "grid":
            weight = float(coeff.field.values[coeff.grid.index_of(point)])
        elif coeff.kind == "trig":
            weight = float(trig_eval_many(coeff.polys[c], coords)[0])
        else:
            weight = to_float(coeff.value)
        derivs = table.derivative(index)
        values += weight * np.array([trig_eval_many(f[c], coords)[0] for f in derivs])
    return values


def elliptic_completion_at(
    space: FunctionSpace,
    point: Union[GridPoint, Sequence],
    span: FunctionalSpan,
    reference: DiffOp,
    tol: Optional[float] = None,
    table: Optional[DerivativeTable] = None,
) -> PointwiseOperator:
    """Solve E f_j(x) = sum_i c_i d^{I_i} f_j(x) for all j and return E - sum_i c_i d^{I_i}."""
    tol = get_settings().tol if tol is None else tol
    if reference.order <= span.order:
        raise InvalidInputError(
            f"Reference order {reference.order} must exceed the span order {span.order}."
        )
    point = _as_point(point)
    table = table or DerivativeTable(space)
    jets = jet_matrix(space, point, span.order, table)
    exact = jets.mode == "exact" and reference.is_analytic
    if exact:
        matrix = jets.rows(span.indices).T if span.rank else sp.zeros(space.size, 0)
        rhs = sp.Matrix(operator_values_at(reference, space, point, table, True))
        if span.rank == 0:
            solution = sp.zeros(0, 1) if all(linalg.exact_is_zero(v) for v in rhs) else None
        else:
            solution = linalg.exact_solve(matrix, rhs)
        if solution is None:
            raise SpanResidualError(float("inf"), tol, f"at {point}")
        coeffs = tuple(solution[i, 0] for i in range(span.rank))
        residual = 0.0
    else:
        values = jets.values if jets.mode == "float" else np.array(jets.values.evalf(30).tolist(), dtype=float)
        positions = [jets.indices.index(i) for i in span.indices]
        matrix = values[positions].T if positions else np.zeros((space.size, 0))
        rhs = operator_values_at(reference, space, point, table, False)
        solution, residual = linalg.float_solve(matrix, rhs)
        scale = max(1.0, float(np.max(np.abs(rhs), initial=0.0)))
        if residual > tol * scale:
            raise SpanResidualError(residual, tol * scale, f"at {point}")
        coeffs = tuple(float(v) for v in solution)
    corrections = {index: Constant(c) for index, c in zip(span.indices, coeffs)}
    mode = "exact" if exact else "float"
    if mode != reference.mode:
        reference = DiffOp.from_terms(reference.dimension, reference.terms, reference.components, mode)
    operator = subtract_lower_order(reference, corrections)
    return PointwiseOperator(point, reference, span, coeffs, operator, residual)
