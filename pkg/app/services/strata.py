"""
Stratified construction for spaces whose rank or spanning order varies.

Stage k picks the point of F_k with the largest rank (then the lowest
spanning order, then grid order), takes the greedy span there, and removes
the points V_k where that tuple stays independent. The Gram determinant D_k
of the tuple on an L2-orthonormal basis vanishes exactly on F_{k+1}; the
descent divides by it when moving from stage k+1 down to stage k.
"""

import itertools
import logging
import warnings
from typing import Optional, Sequence

import numpy as np

from app.core.config import EngineConfig, get_settings
from app.core.errors import InvalidInputError, ResidualViolation, SampledFallbackWarning, StratificationError
from app.models.diffop import DiffOp, Sampled
from app.models.domain import FunctionSpace
from app.models.grid import GridField, GridSpec
from app.models.jets import JetMatrix
from app.models.multiindex import MultiIndex, multi_indices
from app.models.strata import DefiningFunction, Stage, StageFit, Stratification, StratifiedResult
from app.models.trigpoly import TrigPoly
from app.services import linalg
from app.services.constant_rank import RankField, fit_constant_coefficients, jet_stack, rank_field
from app.services.diffop import apply_on_grid, collapse_constant_fields, residual_table, subtract_lower_order
from app.services.funcspace import orthonormalize, trig_eval_many, trig_mul
from app.services.pointwise import DerivativeTable, spanning_functionals

logger = logging.getLogger(__name__)


class _TermLimit(Exception):
    pass


def stratify(
    space: FunctionSpace,
    grid: GridSpec,
    k_star: int,
    tol: Optional[float] = None,
    table: Optional[DerivativeTable] = None,
    field: Optional[RankField] = None,
    stage_limit: Optional[int] = None,
) -> Stratification:
    tol = get_settings().rank_tol if tol is None else tol
    stage_limit = stage_limit or get_settings().stage_limit
    table = table or DerivativeTable(space)
    field = field or rank_field(space, grid, k_star, tol, table=table)
    stack = jet_stack(table, grid, k_star)
    indices = tuple(multi_indices(grid.dimension, k_star))
    remaining = np.arange(grid.size)
    stages = []
    while remaining.size:
        if len(stages) == stage_limit:
            raise StratificationError(
                f"Stage limit {stage_limit} reached with {remaining.size} grid points left."
            )
        ranks = field.ranks[remaining]
        top = remaining[ranks == ranks.max()]
        orders = field.q_min[top]
        seed = int(top[orders == orders.min()][0])
        jets = JetMatrix(grid.point(seed), k_star, indices, stack[seed], "float")
        span = spanning_functionals(jets, tol)
        if span.rank == 0:
            independent = np.ones(remaining.size, dtype=bool)
        else:
            positions = [indices.index(i) for i in span.indices]
            s = linalg.batched_singular_values(stack[remaining][:, positions, :])
            reference = field.sigma_max[remaining]
            independent = (s[:, span.rank - 1] >= tol * reference) & (reference > 0)
        region = remaining[independent]
        remaining = remaining[~independent]
        stage = Stage(len(stages) + 1, seed, span, span.rank, span.order, region, remaining)
        stages.append(stage)
        logger.info(
            "Stage %d: tuple %s, |V|=%d, |F_next|=%d",
            stage.number, [str(i) for i in span.indices], region.size, remaining.size,
        )
    order = max((s.order for s in stages), default=0)
    return Stratification(tuple(stages), order)


def _determinant(matrix: list, limit: int) -> TrigPoly:
    """Laplace expansion along the first row with exact products."""
    size = len(matrix)
    if size == 1:
        return matrix[0][0]
    total = None
    for col in range(size):
        minor = [row[:col] + row[col + 1:] for row in matrix[1:]]
        term = trig_mul(matrix[0][col], _determinant(minor, limit))
        if col % 2:
            term = -term
        total = term if total is None else total + term
        if len(total.terms) > limit:
            raise _TermLimit()
    return total


def _sampled_gram(space: FunctionSpace, span, grid: GridSpec) -> np.ndarray:
    ortho = orthonormalize(space)
    stack = jet_stack(DerivativeTable(ortho), grid, span.order)
    indices = tuple(multi_indices(grid.dimension, span.order))
    positions = [indices.index(i) for i in span.indices]
    selected = stack[:, positions, :]
    return np.linalg.det(selected @ np.transpose(selected, (0, 2, 1)))


def defining_function(space: FunctionSpace, stage: Stage, grid: GridSpec) -> DefiningFunction:
    """
    D = det(J_sel J_sel^T) of the stage tuple on an orthonormal basis of S.
    Exact TrigPoly in exact mode; grid samples in float mode or past the term limit.
    """
    span = stage.span
    count = space.domain.count
    if span.rank == 0:
        ones = tuple(TrigPoly.constant(1, space.dimension, space.mode) for _ in range(count))
        return DefiningFunction(stage.number, GridField(grid, np.ones(grid.size)), ones, 1)
    if space.mode == "exact":
        ortho = orthonormalize(space)
        table = DerivativeTable(ortho)
        rows = [table.derivative(i) for i in span.indices]
        polys = []
        try:
            for c in range(count):
                gram = [[None] * span.rank for _ in range(span.rank)]
                for a, b in itertools.product(range(span.rank), repeat=2):
                    if b < a:
                        gram[a][b] = gram[b][a]
                        continue
                    entry = TrigPoly.zero(space.dimension, "exact")
                    for j in range(space.size):
                        entry = entry + trig_mul(rows[a][j][c], rows[b][j][c])
                    gram[a][b] = entry
                polys.append(_determinant(gram, EngineConfig.DEFINING_TERM_LIMIT))
        except _TermLimit:
            logger.warning("Stage %d: Gram determinant exceeds the term limit; using samples", stage.number)
            warnings.warn("Defining function replaced by grid samples (term limit).", SampledFallbackWarning, stacklevel=2)
            return DefiningFunction(stage.number, GridField(grid, _sampled_gram(space, span, grid)), None, 0, True)
        samples = np.empty(grid.size)
        for c, poly in enumerate(polys):
            part = grid.component_slice(c)
            samples[part] = trig_eval_many(poly, grid.coordinates[part])
        terms = sum(len(p.terms) for p in polys)
        return DefiningFunction(stage.number, GridField(grid, samples), tuple(polys), terms)
    logger.warning("Stage %d: float mode, defining function is grid-sampled", stage.number)
    warnings.warn("Defining function is grid-sampled in float mode.", SampledFallbackWarning, stacklevel=2)
    return DefiningFunction(stage.number, GridField(grid, _sampled_gram(space, span, grid)), None, 0, True)


def _trig_design(coords: np.ndarray, cutoff: int) -> np.ndarray:
    """cos/sin(2 pi <m, x>) for canonical m with |m|_inf <= cutoff."""
    n = coords.shape[1]
    columns = []
    for freq in itertools.product(range(-cutoff, cutoff + 1), repeat=n):
        first = next((m for m in freq if m != 0), 0)
        if first < 0:
            continue
        angle = 2.0 * np.pi * (coords @ np.asarray(freq, dtype=float))
        columns.append(np.cos(angle))
        if first > 0:
            columns.append(np.sin(angle))
    return np.column_stack(columns)


def _fit_trig(values: np.ndarray, region: np.ndarray, grid: GridSpec, cutoff: int) -> np.ndarray:
    """Least-squares trig fit of region samples, evaluated on the whole grid (per component)."""
    fitted = np.zeros((grid.size, values.shape[1]))
    for c in range(grid.components):
        part = np.flatnonzero(grid.component_ids == c)
        inside = np.isin(region, part)
        if not inside.any():
            continue
        design = _trig_design(grid.coordinates[region[inside]], cutoff)
        weights, *_ = np.linalg.lstsq(design, values[inside], rcond=None)
        fitted[part] = _trig_design(grid.coordinates[part], cutoff) @ weights
    return fitted


def stratified_build(
    space: FunctionSpace,
    strat: Stratification,
    reference: DiffOp,
    grid: GridSpec,
    tol: Optional[float] = None,
    coeff_model: str = "grid",
    table: Optional[DerivativeTable] = None,
    defining: Optional[Sequence[DefiningFunction]] = None,
) -> StratifiedResult:
    """
    Descend from the last stage: fit G on F_n cap V_n, E_n = E - G_n; then for
    each lower stage fit G_s to (E_{s+1} f) / D_s on F_s cap V_s and set
    E_s = E_{s+1} - D_s G_s. The correction vanishes where D_s does, so E_s
    still annihilates S on F_{s+1}.

    With coeff_model "grid" each stage only sets its fields on its own V_s, so
    the glued lower-order coefficients are piecewise across strata (for
    sin(2 pi x) sin(2 pi y) the identity coefficient is -4 (2 pi)^4 on V_1 and
    0 on the zero lines). The result carries a note saying so; "trig" fits
    give coefficients defined off the grid.
    """
    tol = get_settings().tol if tol is None else tol
    rank_tol = get_settings().rank_tol
    if coeff_model not in ("grid", "trig"):
        raise InvalidInputError(f"Unknown coefficient model: {coeff_model}")
    if reference.order <= strat.order:
        raise InvalidInputError(f"Reference order {reference.order} must exceed q={strat.order}.")
    table = table or DerivativeTable(space)
    defining = list(defining) if defining is not None else [defining_function(space, s, grid) for s in strat.stages]
    original = reference
    current = DiffOp.from_terms(reference.dimension, reference.terms, reference.components, "float")
    limit = tol * max(1.0, float(np.max(np.abs([apply_on_grid(current, f, grid) for f in space.basis]))))
    stack = jet_stack(table, grid, max(strat.order, 0))
    indices = tuple(multi_indices(grid.dimension, max(strat.order, 0)))
    fits = []
    last = strat.count - 1
    for i in range(last, -1, -1):
        stage = strat.stages[i]
        region = stage.region
        before = np.array([apply_on_grid(current, f, grid) for f in space.basis])
        scale = max(1.0, float(np.max(np.abs(before), initial=0.0)))
        if i == last:
            divisor = np.ones(grid.size)
        else:
            divisor = np.asarray(defining[i].samples.values)
            if region.size:
                floor = rank_tol ** 2 * float(np.max(np.abs(divisor[region])))
                if np.min(np.abs(divisor[region])) <= floor:
                    worst = grid.point(int(region[np.argmin(np.abs(divisor[region]))]))
                    raise StratificationError(f"Stage {stage.number}: defining function too small at {worst}.")
        model, cutoff, fell_back, fit_residual = coeff_model, None, False, 0.0
        if stage.rank == 0 or region.size == 0:
            after = current
        else:
            target = (before[:, region] / divisor[region]).T  # (K, N)
            positions = [indices.index(ix) for ix in stage.span.indices]
            transposed = np.transpose(stack[region][:, positions, :], (0, 2, 1))  # (K, N, m)
            local = (np.linalg.pinv(transposed) @ target[..., None])[..., 0]  # (K, m)
            target_scale = max(1.0, float(np.max(np.abs(target))))
            fit_residual = float(np.max(np.abs((transposed @ local[..., None])[..., 0] - target)))
            if fit_residual > tol * target_scale:
                worst = grid.point(int(region[np.argmax(np.max(np.abs((transposed @ local[..., None])[..., 0] - target), axis=1))]))
                raise StratificationError(
                    f"Stage {stage.number}: pointwise fit residual {fit_residual:.3e} at {worst}."
                )
            coefficients = np.zeros((grid.size, stage.rank))
            coefficients[region] = local
            if coeff_model == "trig":
                coefficients, cutoff, fell_back, fit_residual = _trig_model(
                    space, local, region, grid, transposed, target, tol * target_scale, coefficients, fit_residual
                )
                model = "grid" if fell_back else "trig"
            corrections = {
                index: Sampled(GridField(grid, divisor * coefficients[:, col]))
                for col, index in enumerate(stage.span.indices)
            }
            after = subtract_lower_order(current, corrections)
        values = np.array([apply_on_grid(after, f, grid) for f in space.basis])
        covered = np.concatenate([region, stage.remaining])
        annihilation = float(np.max(np.abs(values[:, covered]), initial=0.0))
        if annihilation > tol * scale:
            raise StratificationError(
                f"Stage {stage.number}: operator fails to annihilate S on F_{stage.number} "
                f"(residual {annihilation:.3e})."
            )
        change = float(np.max(np.abs(values - before)[:, stage.remaining], initial=0.0)) if i < last else 0.0
        fits.append(StageFit(stage.number, model, fit_residual, change, cutoff, fell_back))
        logger.info("Stage %d: fitted (%s), zero-set change %.3e", stage.number, model, change)
        current = after

    current = collapse_constant_fields(current, tol)
    residuals = residual_table(current, space.basis, grid)
    sup = float(np.max(residuals, initial=0.0))
    if sup > limit:
        basis_index, p = np.unravel_index(int(np.argmax(residuals)), residuals.shape)
        point = grid.point(int(p))
        raise ResidualViolation(sup, limit, point.as_floats(), point.component, int(basis_index))
    constant_form = None
    if original.is_analytic:
        union = {ix for s in strat.stages for ix in s.span.indices}
        constant_form = fit_constant_coefficients(space, original, sorted(union, key=MultiIndex.sort_key), tol)
    notes = []
    if sum(1 for s in strat.stages if s.region.size) > 1 and any(f.model == "grid" for f in fits):
        notes.append(
            "Grid-sampled coefficients are fitted stage by stage and jump across stage boundaries; "
            "they are defined at grid points only."
        )
    return StratifiedResult(current, strat, tuple(reversed(fits)), sup, constant_form, notes)


def _trig_model(space, local, region, grid, transposed, target, limit, grid_coefficients, grid_residual):
    """Frequency-bounded trig fit of the coefficient fields, doubling the cutoff on failure."""
    cutoff = max(1, 2 * space.max_frequency())
    for _ in range(EngineConfig.TRIG_FIT_RETRIES + 1):
        fitted = _fit_trig(local, region, grid, cutoff)
        residual = float(np.max(np.abs((transposed @ fitted[region][..., None])[..., 0] - target)))
        if residual <= limit:
            return fitted, cutoff, False, residual
        logger.info("Trig fit with cutoff %d missed (residual %.3e); doubling", cutoff, residual)
        cutoff *= 2
    logger.warning("Trig coefficient fit failed up to cutoff %d; keeping grid samples", cutoff // 2)
    return grid_coefficients, cutoff // 2, True, grid_residual
