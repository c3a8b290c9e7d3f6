"""
Constant-rank global construction: independence patches grown from seeds,
smooth coefficient fields per patch, partition-of-unity gluing, verification.
"""

import logging
from dataclasses import dataclass
from math import comb
from typing import Optional, Sequence

import numpy as np
import sympy as sp

from app.core.config import EngineConfig, get_settings
from app.core.errors import CoverError, InvalidInputError, NonConstantRankError, PatchSingularityError, ResidualViolation, SpanResidualError
from app.models.cover import ConstantRankResult, CoverPatch, GluedOperator, PartitionOfUnity, PatchFields
from app.models.diffop import Constant, DiffOp, Sampled
from app.models.domain import FunctionSpace
from app.models.grid import GridField, GridSpec
from app.models.jets import JetMatrix
from app.models.multiindex import MultiIndex, multi_indices
from app.services import bumps, linalg
from app.services.diffop import apply, apply_on_grid, collapse_constant_fields, ellipticity_check, residual_table, subtract_lower_order
from app.services.pointwise import DerivativeTable, jet_matrix, spanning_functionals

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class RankField:
    grid: GridSpec
    order: int
    ranks: np.ndarray
    q_min: np.ndarray
    sigma_max: np.ndarray

    @property
    def constant_rank(self) -> bool:
        return len(set(self.ranks.tolist())) == 1

    @property
    def constant_order(self) -> bool:
        return len(set(self.q_min.tolist())) == 1

    def histogram(self) -> dict:
        values, counts = np.unique(self.ranks, return_counts=True)
        return {str(int(v)): int(c) for v, c in zip(values, counts)}


def jet_stack(table: DerivativeTable, grid: GridSpec, order: int) -> np.ndarray:
    """(P, R, N): the float jet matrix at every grid point."""
    return np.ascontiguousarray(table.grid_values(grid, order).transpose(2, 0, 1))


def jets_at_index(stack: np.ndarray, grid: GridSpec, p: int, order: int) -> JetMatrix:
    indices = tuple(multi_indices(grid.dimension, order))
    return JetMatrix(grid.point(p), order, indices, stack[p], "float")


def rank_field(
    space: FunctionSpace,
    grid: GridSpec,
    k_star: int,
    tol: Optional[float] = None,
    exact: bool = False,
    table: Optional[DerivativeTable] = None,
) -> RankField:
    """
    r(x) and q_min(x) at every grid point. q_min is the lowest order whose
    prefix of rows already reaches r(x), which is also the largest order the
    greedy graded-lex selection picks.
    """
    tol = get_settings().rank_tol if tol is None else tol
    table = table or DerivativeTable(space)
    stack = jet_stack(table, grid, k_star)
    s = linalg.batched_singular_values(stack)
    sigma_max = s[:, 0] if s.shape[1] else np.zeros(grid.size)
    if exact and space.mode == "exact":
        ranks, q_min = _exact_ranks(space, grid, k_star, table)
    else:
        ranks = linalg.batched_rank(stack, tol, sigma_max)
        q_min = np.zeros(grid.size, dtype=int)
        settled = ranks == 0
        for j in range(k_star + 1):
            rows = comb(grid.dimension + j, grid.dimension)
            prefix = linalg.batched_rank(stack[:, :rows, :], tol, sigma_max)
            reached = (prefix == ranks) & ~settled
            q_min[reached] = j
            settled |= reached
    logger.info("Rank field on %d points: ranks %s", grid.size, sorted(set(ranks.tolist())))
    return RankField(grid, k_star, ranks, q_min, sigma_max)


def _exact_ranks(space: FunctionSpace, grid: GridSpec, k_star: int, table: DerivativeTable) -> tuple:
    ranks = np.zeros(grid.size, dtype=int)
    q_min = np.zeros(grid.size, dtype=int)
    for p in range(grid.size):
        jets = jet_matrix(space, grid.point(p), k_star, table)
        ranks[p] = linalg.exact_rank(jets.values)
        for j in range(k_star + 1):
            rows = comb(grid.dimension + j, grid.dimension)
            if linalg.exact_rank(jets.values[:rows, :]) == ranks[p]:
                q_min[p] = j
                break
    return ranks, q_min


def box_distance(grid: GridSpec, center: Sequence[float]) -> np.ndarray:
    """Chebyshev distance on the torus from every grid point to center."""
    d = bumps.circle_distance(grid.coordinates, np.asarray(center, dtype=float)[None, :])
    return np.max(d, axis=1)


def _inside(grid: GridSpec, component: int, center, half_width: float, inner: bool = False) -> np.ndarray:
    same = grid.component_ids == component
    if half_width >= 0.5:
        return same
    d = box_distance(grid, center)
    return same & ((d <= half_width / 2) if inner else (d < half_width))


def _patch_quality(selected: np.ndarray, dual: np.ndarray) -> tuple:
    """(min sigma_min of the selected rows, max cond of J_sel(x) G) over a point set."""
    m = selected.shape[1]
    if m == 0 or selected.shape[0] == 0:
        return float("inf"), 1.0
    s = linalg.batched_singular_values(selected)
    frame = selected @ dual
    return float(np.min(s[:, m - 1])), float(np.max(np.linalg.cond(frame)))


def build_cover(
    space: FunctionSpace,
    k_star: int,
    seeds: Sequence,
    grid: GridSpec,
    threshold: Optional[float] = None,
    tol: Optional[float] = None,
    table: Optional[DerivativeTable] = None,
    field: Optional[RankField] = None,
) -> list[CoverPatch]:
    """
    Grow a periodic box around each still-uncovered seed while the seed's span
    stays independent (margin above threshold, J_sel(x) G well conditioned),
    and keep it when its inner half covers new grid points.
    """
    if not seeds:
        raise CoverError("Cannot build a cover from an empty seed set.")
    tol = get_settings().rank_tol if tol is None else tol
    table = table or DerivativeTable(space)
    field = field or rank_field(space, grid, k_star, tol, table=table)
    if not field.constant_rank:
        raise NonConstantRankError(field.ranks.tolist())
    stack = jet_stack(table, grid, k_star)
    if threshold is None:
        threshold = EngineConfig.INDEPENDENCE_FACTOR * float(np.max(field.sigma_max))
    indices = tuple(multi_indices(grid.dimension, k_star))
    covered = np.zeros(grid.size, dtype=bool)
    patches: list[CoverPatch] = []
    for seed in seeds:
        p = seed if isinstance(seed, (int, np.integer)) else grid.index_of(seed)
        if covered[p]:
            continue
        patch = _grow_patch(stack, grid, int(p), indices, threshold, tol)
        if patch is None:
            logger.debug("Seed %s admits no valid patch", grid.point(p))
            continue
        gain = _inside(grid, patch.component, patch.center, patch.half_width, inner=True) & ~covered
        if np.any(gain):
            covered |= gain
            patches.append(patch)
        if covered.all():
            break
    if not covered.all():
        first = grid.point(int(np.argmin(covered)))
        raise CoverError(
            f"{int((~covered).sum())} grid points left uncovered (first at {first}); "
            "lower the independence threshold or refine the grid."
        )
    logger.info("Stage 2: Built cover with %d patches", len(patches))
    return patches


def _grow_patch(stack, grid: GridSpec, p: int, indices: tuple, threshold: float, tol: float) -> Optional[CoverPatch]:
    point = grid.point(p)
    jets = JetMatrix(point, indices[-1].degree, indices, stack[p], "float")
    span = spanning_functionals(jets, tol)
    center = point.as_floats()
    if span.rank == 0:
        return CoverPatch(point.component, center, 0.5, span, 0.0, 1.0, p)
    positions = [indices.index(i) for i in span.indices]
    selected = stack[:, positions, :]
    dual = np.linalg.pinv(selected[p])

    def quality(h: float) -> Optional[tuple]:
        mask = _inside(grid, point.component, center, h)
        margin, condition = _patch_quality(selected[mask], dual)
        if margin > threshold and condition <= EngineConfig.PATCH_CONDITION_LIMIT:
            return margin, condition
        return None

    h = 1.0 / (2 * grid.resolution)
    best = quality(h)
    if best is None:
        return None
    failed = None
    for _ in range(EngineConfig.MAX_GROWTH_STEPS):
        if h >= 0.5:
            break
        trial = min(2 * h, 0.5) if failed is None else (h + failed) / 2
        result = quality(trial)
        if result is None:
            failed = trial
        else:
            h, best = trial, result
    return CoverPatch(point.component, center, h, span, best[0], best[1], p)


def patch_coefficients(
    space: FunctionSpace,
    patch: CoverPatch,
    reference: DiffOp,
    grid: GridSpec,
    method: str = "direct",
    tol: Optional[float] = None,
    table: Optional[DerivativeTable] = None,
) -> PatchFields:
    """
    c(x) on the patch support with E f_j(x) = sum_i c_i(x) P_i f_j(x).

    direct:        least squares against J_sel(x)^T.
    dual_frame:    dual functions g_i = sum_j G_ji f_j with P_k g_i(center) = delta_ki,
                   M(x) = (J_sel(x) G)^T = (I + A(x))^T, V(x) = G^T e(x), c = M^{-1} V.
    """
    if method not in ("direct", "dual_frame"):
        raise InvalidInputError(f"Unknown coefficient method: {method}")
    tol = get_settings().tol if tol is None else tol
    if reference.order <= patch.span.order:
        raise InvalidInputError("Reference order must exceed the patch span order.")
    table = table or DerivativeTable(space)
    order = max(patch.span.order, 0)
    stack = jet_stack(table, grid, order)
    indices = tuple(multi_indices(grid.dimension, order))
    points = np.flatnonzero(_inside(grid, patch.component, patch.center, patch.half_width))
    e = np.array([apply_on_grid(reference, f, grid) for f in space.basis]).T[points]  # (K, N)
    m = patch.span.rank
    if m == 0:
        values = np.zeros((len(points), 0))
        residual = float(np.max(np.abs(e), initial=0.0))
    else:
        positions = [indices.index(i) for i in patch.span.indices]
        selected = stack[points][:, positions, :]  # (K, m, N)
        transposed = np.transpose(selected, (0, 2, 1))
        if method == "direct":
            values = (np.linalg.pinv(transposed) @ e[..., None])[..., 0]
        else:
            dual = np.linalg.pinv(stack[patch.seed_index][positions, :])
            frame = np.transpose(selected @ dual, (0, 2, 1))
            condition = np.linalg.cond(frame)
            if not np.all(np.isfinite(condition)) or np.max(condition) > EngineConfig.PATCH_CONDITION_LIMIT:
                raise PatchSingularityError(
                    f"I + A(x) is singular on the patch around {grid.point(patch.seed_index)} "
                    f"(condition {np.max(condition):.3e})."
                )
            rhs = (dual.T @ e.T).T
            values = np.linalg.solve(frame, rhs[..., None])[..., 0]
        residual = float(np.max(np.abs((transposed @ values[..., None])[..., 0] - e), initial=0.0))
    scale = max(1.0, float(np.max(np.abs(e), initial=0.0)))
    if residual > tol * scale:
        raise SpanResidualError(residual, tol * scale, f"patch around {grid.point(patch.seed_index)}")
    return PatchFields(patch, points, values, method, residual)


def partition_of_unity(patches: Sequence[CoverPatch], grid: GridSpec) -> PartitionOfUnity:
    """pi_j = b_j / sum b with b_j a product of per-axis plateau bumps."""
    raw = np.zeros((len(patches), grid.size))
    for j, patch in enumerate(patches):
        same = grid.component_ids == patch.component
        raw[j, same] = bumps.periodic_box_bump(grid.coordinates[same], patch.center, patch.half_width)
    total = raw.sum(axis=0)
    if np.any(total <= 0):
        first = grid.point(int(np.argmax(total <= 0)))
        raise CoverError(f"Partition of unity undefined: grid point {first} lies in no patch.")
    return PartitionOfUnity(grid, raw / total)


def glue_and_verify(
    space: FunctionSpace,
    fields: Sequence[PatchFields],
    partition: PartitionOfUnity,
    reference: DiffOp,
    grid: GridSpec,
    tol: Optional[float] = None,
) -> GluedOperator:
    """
    E_0 = E - sum_I (sum_j pi_j c_I^(j)) d^I, verified on the grid against
    tol relative to sup |E f|.
    """
    tol = get_settings().tol if tol is None else tol
    indices = sorted({i for f in fields for i in f.patch.span.indices}, key=MultiIndex.sort_key)
    glued = {i: np.zeros(grid.size) for i in indices}
    for j, f in enumerate(fields):
        weights = partition.weights[j, f.points]
        for i, index in enumerate(f.patch.span.indices):
            glued[index][f.points] += weights * f.values[:, i]
    corrections = {index: Sampled(GridField(grid, values)) for index, values in glued.items()}
    operator = collapse_constant_fields(subtract_lower_order(reference, corrections), tol)

    residuals = residual_table(operator, space.basis, grid)
    bound = _triangle_bound(space, fields, partition, reference, grid)
    scale = max(1.0, float(np.max(np.abs([apply_on_grid(reference, f, grid) for f in space.basis]))))
    triangle_ok = bool(np.all(residuals <= bound + tol * scale))
    sup = float(np.max(residuals, initial=0.0))
    worst_basis, worst_point = np.unravel_index(int(np.argmax(residuals)), residuals.shape)
    report = ellipticity_check(operator, grid)
    if sup > tol * scale:
        point = grid.point(int(worst_point))
        raise ResidualViolation(sup, tol * scale, point.as_floats(), point.component, int(worst_basis))
    logger.info("Stage 4: Glued operator residual sup %.3e", sup)
    return GluedOperator(operator, sup, int(worst_point), int(worst_basis), triangle_ok, report)


def _triangle_bound(space, fields, partition, reference, grid) -> np.ndarray:
    """sum_j pi_j(x) |E_j f(x)| per basis function, E_j the patch-local operator."""
    bound = np.zeros((space.size, grid.size))
    e = np.array([apply_on_grid(reference, f, grid) for f in space.basis])
    table = DerivativeTable(space)
    order = max((f.patch.span.order for f in fields), default=0)
    stack = jet_stack(table, grid, order)
    indices = tuple(multi_indices(grid.dimension, order))
    for j, f in enumerate(fields):
        positions = [indices.index(i) for i in f.patch.span.indices]
        local = e[:, f.points].copy()
        if positions:
            selected = stack[f.points][:, positions, :]
            local -= np.einsum("kmn,km->nk", selected, f.values)
        bound[:, f.points] += partition.weights[j, f.points] * np.abs(local)
    return bound


def fit_constant_coefficients(
    space: FunctionSpace,
    reference: DiffOp,
    indices: Sequence[MultiIndex],
    tol: Optional[float] = None,
) -> Optional[DiffOp]:
    """
    Constant c_I with (E - sum_I c_I d^I) f = 0 identically for every f in S,
    solved over trigonometric coefficients. None when no such constants exist.
    """
    tol = get_settings().tol if tol is None else tol
    if not reference.is_analytic:
        raise InvalidInputError("Constant fits need a reference operator without sampled coefficients.")
    indices = sorted(set(indices), key=MultiIndex.sort_key)
    if any(i.degree >= reference.order for i in indices):
        raise InvalidInputError("Fitted indices must stay below the reference order.")
    table = DerivativeTable(space)
    images = [apply(reference, f) for f in space.basis]
    keys: list = []
    for j in range(space.size):
        seen = set()
        for c in range(space.domain.count):
            for poly in [images[j][c]] + [table.derivative(i)[j][c] for i in indices]:
                for key in poly.keys:
                    if (c, key) not in seen:
                        seen.add((c, key))
                        keys.append((j, c, key))
    row_of = {key: r for r, key in enumerate(keys)}
    exact = space.mode == "exact"
    zero = sp.Integer(0) if exact else 0.0
    matrix = [[zero] * len(indices) for _ in keys]
    rhs = [zero] * len(keys)
    for j in range(space.size):
        for c in range(space.domain.count):
            for key, coeff in images[j][c].terms:
                rhs[row_of[(j, c, key)]] = coeff
            for col, index in enumerate(indices):
                for key, coeff in table.derivative(index)[j][c].terms:
                    matrix[row_of[(j, c, key)]][col] = coeff
    if not indices:
        solved = not any(v != 0 for v in rhs) if exact else float(np.max(np.abs(np.array(rhs, dtype=float)), initial=0.0)) <= tol
        return reference if solved else None
    if exact:
        solution = linalg.exact_solve(sp.Matrix(matrix), sp.Matrix(rhs))
        if solution is None:
            return None
        coeffs = [solution[i, 0] for i in range(len(indices))]
    else:
        a = np.array(matrix, dtype=float)
        b = np.array(rhs, dtype=float)
        solution, residual = linalg.float_solve(a, b)
        limit = tol * max(1.0, float(np.max(np.abs(b), initial=0.0)))
        if residual > limit:
            return None
        coeffs = [float(v) for v in solution]
        # drop least-squares noise when the remaining constants still solve the system
        floor = tol * max(1.0, max((abs(c) for c in coeffs), default=0.0))
        keep = [col for col, c in enumerate(coeffs) if abs(c) > floor]
        if float(np.max(np.abs(b - a[:, keep] @ solution[keep]), initial=0.0)) <= limit:
            indices, coeffs = [indices[col] for col in keep], [coeffs[col] for col in keep]
    ref = reference if reference.mode == space.mode else DiffOp.from_terms(
        reference.dimension, reference.terms, reference.components, space.mode
    )
    return subtract_lower_order(ref, {index: Constant(c) for index, c in zip(indices, coeffs)})


def construct_constant_rank(
    space: FunctionSpace,
    reference: DiffOp,
    grid: GridSpec,
    k_star: int,
    tol: Optional[float] = None,
    method: str = "direct",
    seeds: Optional[Sequence] = None,
    table: Optional[DerivativeTable] = None,
    field: Optional[RankField] = None,
) -> ConstantRankResult:
    """Cover, patch fields (both methods, cross-checked), partition of unity, glue."""
    tol = get_settings().tol if tol is None else tol
    table = table or DerivativeTable(space)
    reference = DiffOp.from_terms(reference.dimension, reference.terms, reference.components, "float")
    seeds = list(range(grid.size)) if seeds is None else seeds
    patches = build_cover(space, k_star, seeds, grid, tol=get_settings().rank_tol, table=table, field=field)
    logger.info("Stage 3: Solving coefficient fields on %d patches", len(patches))
    fields = []
    agreement = 0.0
    for patch in patches:
        primary = patch_coefficients(space, patch, reference, grid, method, tol, table)
        other = patch_coefficients(
            space, patch, reference, grid, "dual_frame" if method == "direct" else "direct", tol, table
        )
        if primary.values.size:
            agreement = max(agreement, float(np.max(np.abs(primary.values - other.values))))
        fields.append(primary)
    partition = partition_of_unity(patches, grid)
    partition_error = float(np.max(np.abs(partition.weights.sum(axis=0) - 1.0)))
    glued = glue_and_verify(space, fields, partition, reference, grid, tol)
    return ConstantRankResult(glued, tuple(patches), tuple(fields), partition, agreement, partition_error)
