"""
End-to-end discovery of an elliptic annihilator for a finite-dimensional
space, plus the independent verification used by ``verify``.
"""

import logging
import time
from contextlib import contextmanager
from typing import Optional, Sequence

import numpy as np

from app.core.config import default_grid_resolution, get_settings
from app.core.errors import ConstructionError, DimensionMismatchError, InvalidInputError, VerificationError
from app.models.cover import ChartCover
from app.models.diffop import DiffOp
from app.models.domain import FunctionSpace
from app.models.grid import GridSpec
from app.models.multiindex import MultiIndex
from app.models.strata import DefiningFunction, StratifiedResult
from app.schemas.options import AnnihilateOptions
from app.schemas.report import (
    AnalyzeReport,
    CoverReport,
    Offender,
    PatchReport,
    PipelineReport,
    PointRank,
    SobolevReport,
    StageReport,
    StratificationReport,
    VerificationReport,
    WitnessReport,
)
from app.services import witness
from app.services.constant_rank import RankField, construct_constant_rank, fit_constant_coefficients, jet_stack, jets_at_index, rank_field
from app.services.diffop import apply, ellipticity_check, reference_operator, residual_table
from app.services.pointwise import DerivativeTable, jet_closure_order, spanning_functionals
from app.services.sobolev import dimension_certificate, measure_cover_equivalence, mode_divergence, norm_equivalence_constant, sobolev_gram
from app.services.strata import defining_function, stratified_build, stratify

logger = logging.getLogger(__name__)

WORST_OFFENDERS = 5


class _Timer:
    def __init__(self, enabled: bool):
        self.enabled = enabled
        self.values: dict[str, float] = {}

    @contextmanager
    def stage(self, name: str):
        start = time.perf_counter()
        try:
            yield
        finally:
            self.values[name] = time.perf_counter() - start

    def report(self) -> Optional[dict]:
        return dict(self.values) if self.enabled else None


def _grid_for(space: FunctionSpace, resolution: Optional[int]) -> GridSpec:
    return GridSpec(space.dimension, resolution or default_grid_resolution(space.dimension), space.domain.count)


def _scalar_out(value, mode: str):
    return str(value) if mode == "exact" else float(value)


def _span_out(indices: Sequence[MultiIndex]) -> list[list[int]]:
    return [list(i.entries) for i in indices]


def _cover_report(result, symbol_min: float) -> CoverReport:
    patches = [
        PatchReport(
            component=p.component,
            center=[repr(float(c)) for c in p.center],
            half_width=p.half_width,
            span=_span_out(p.span.indices),
            margin=p.margin,
            condition=p.condition,
        )
        for p in result.patches
    ]
    return CoverReport(
        patches=patches,
        margins=[p.margin for p in result.patches],
        method_agreement=result.method_agreement,
        partition_error=result.partition_error,
        residual_sup=result.glued.residual_sup,
        triangle_ok=result.glued.triangle_ok,
        symbol_min=symbol_min,
    )


def _stage_reports(strat, defining: Sequence[DefiningFunction], result: Optional[StratifiedResult] = None) -> list[StageReport]:
    fits = {fit.stage: fit for fit in result.fits} if result is not None else {}
    reports = []
    for stage, g in zip(strat.stages, defining):
        fit = fits.get(stage.number)
        reports.append(StageReport(
            stage=stage.number,
            m=stage.rank,
            q=stage.order,
            span=_span_out(stage.span.indices),
            v_count=int(stage.region.size),
            f_next_count=int(stage.remaining.size),
            g_terms=g.term_count if not g.sampled_fallback else None,
            g_sampled=g.sampled_fallback,
            fit_model=fit.model if fit else None,
            fit_residual=fit.residual if fit else None,
            zero_set_change=fit.zero_set_change if fit else None,
        ))
    return reports


def _exactly_annihilates(op: DiffOp, space: FunctionSpace) -> bool:
    return all(all(p.is_zero for p in apply(op, f)) for f in space.basis)


def _run_constant_rank(space, reference, grid, k_star, tol, options, table, field):
    result = construct_constant_rank(
        space, reference, grid, k_star, tol, options.coefficient_method, table=table, field=field
    )
    indices = {i for p in result.patches for i in p.span.indices}
    return result.glued.operator, result.glued.residual_sup, indices, result, None


def _run_stratified(space, reference, grid, k_star, tol, options, table, field):
    settings = get_settings()
    strat = stratify(space, grid, k_star, settings.rank_tol, table, field, settings.stage_limit)
    defining = [defining_function(space, stage, grid) for stage in strat.stages]
    result = stratified_build(space, strat, reference, grid, tol, options.coeff_model, table, defining)
    indices = {i for s in strat.stages for i in s.span.indices}
    report = StratificationReport(
        stages=_stage_reports(strat, defining, result),
        q=strat.order,
        residual_sup=result.residual_sup,
        constant_form=str(result.constant_form) if result.constant_form is not None else None,
        notes=list(result.notes),
    )
    return result.operator, result.residual_sup, indices, None, report


_PATHS = {"constant-rank": _run_constant_rank, "stratified": _run_stratified}


def discover_annihilator(
    space: FunctionSpace,
    options: Optional[AnnihilateOptions] = None,
) -> tuple[DiffOp, PipelineReport]:
    """
    Build an elliptic operator annihilating every function of ``space``.

    The reference operator has order 2p > q. With method "auto" the
    constant-rank path runs when rank and spanning order are constant on the
    grid, the stratified path otherwise, and the other path is tried when the
    first one fails. A constant-coefficient operator over the chosen functional
    indices replaces the path operator when it annihilates the space.
    """
    options = options or AnnihilateOptions()
    settings = get_settings()
    tol = options.tol or settings.tol
    timer = _Timer(options.timings)

    with timer.stage("analyze"):
        logger.info("Stage 1: Analyzing a %d-dimensional space on %d component(s)", space.size, space.domain.count)
        table = DerivativeTable(space)
        k_star = jet_closure_order(space, table)
        grid = _grid_for(space, options.grid)
        field = rank_field(space, grid, k_star, settings.rank_tol, table=table)
        q = int(np.max(field.q_min))

    order = options.elliptic_order or 2 * (q // 2 + 1)
    if order <= q:
        raise InvalidInputError(f"Elliptic order {order} must exceed the spanning order q={q}.")
    reference = reference_operator(space.dimension, order, space.domain.count, space.mode, options.negate)

    with timer.stage("norm_constant"):
        norm_constant = float(norm_equivalence_constant(space, max(1, k_star)))

    preferred = "constant-rank" if field.constant_rank and field.constant_order else "stratified"
    if options.method == "auto":
        paths = [preferred, "stratified" if preferred == "constant-rank" else "constant-rank"]
    else:
        paths = [options.method]

    failures = []
    outcome = None
    for path in paths:
        try:
            with timer.stage(path):
                outcome = _PATHS[path](space, reference, grid, k_star, tol, options, table, field)
            break
        except (ConstructionError, VerificationError) as exc:
            if options.method != "auto":
                raise
            logger.warning("Path %s failed: %s", path, exc.detail)
            failures.append(f"{path}: {exc.detail}")
    if outcome is None:
        raise ConstructionError("Both construction paths failed. " + " | ".join(failures))

    operator, residual_sup, indices, cover_result, strat_report = outcome
    constant_form = False
    exact_zero = False
    with timer.stage("constant_form"):
        constant = fit_constant_coefficients(space, reference, sorted(indices, key=MultiIndex.sort_key), tol)
        if constant is not None:
            if space.mode == "exact":
                exact_zero = _exactly_annihilates(constant, space)
                accepted = exact_zero
                constant_sup = 0.0
            else:
                constant_sup = float(np.max(residual_table(constant, space.basis, grid), initial=0.0))
                accepted = constant_sup <= tol
            if accepted:
                logger.info("Stage 5: Constant-coefficient form annihilates the space: %s", constant)
                operator, residual_sup, constant_form = constant, constant_sup, True

    symbol = ellipticity_check(operator, grid)
    if not symbol.passed:
        raise VerificationError(
            f"Principal symbol minimum {symbol.min_modulus:.3e} does not exceed margin {symbol.margin:.1e}."
        )

    report = PipelineReport(
        dimension=space.dimension,
        components=space.domain.count,
        mode=space.mode,
        N=space.size,
        k_star=k_star,
        norm_constant=norm_constant,
        q=q,
        elliptic_order=order,
        path=paths[len(failures)],
        fallback_used=bool(failures),
        operator=str(operator),
        residual_sup=residual_sup,
        exact_residual_zero=exact_zero,
        symbol_min=symbol.min_modulus,
        constant_form=constant_form,
        cover=_cover_report(cover_result, symbol.min_modulus) if cover_result is not None else None,
        stratification=strat_report,
        timings=timer.report(),
    )
    logger.info("Discovered order-%d annihilator via %s (residual %.3e)", order, report.path, residual_sup)
    return operator, report


def _offenders(residuals: np.ndarray, grid: GridSpec, limit: int = WORST_OFFENDERS) -> list[Offender]:
    basis_index, point_index = np.indices(residuals.shape)
    order = np.lexsort((point_index.ravel(), basis_index.ravel(), -residuals.ravel()))
    worst = []
    for flat in order[:limit]:
        j, p = divmod(int(flat), residuals.shape[1])
        point = grid.point(p)
        worst.append(Offender(
            x=[str(c) for c in point.coords],
            component=point.component,
            basis_index=j + 1,
            residual=float(residuals[j, p]),
        ))
    return worst


def verify_operator(
    operator: DiffOp,
    space: FunctionSpace,
    grid: Optional[GridSpec] = None,
    tol: Optional[float] = None,
) -> VerificationReport:
    """
    Recompute P f_j on the grid from the operator alone and check residuals
    and the symbol margin. Analytic operators over exact spaces are also
    checked symbolically; a symbolic zero reports residual 0.
    """
    tol = get_settings().tol if tol is None else tol
    if operator.dimension != space.dimension:
        raise DimensionMismatchError(space.dimension, operator.dimension, "operator dimension")
    if operator.components != space.domain.count:
        raise DimensionMismatchError(space.domain.count, operator.components, "operator components")
    if grid is None:
        grid = operator.grid or _grid_for(space, None)
    exact = space.mode == "exact" and operator.is_analytic and _exactly_annihilates(operator, space)
    residuals = residual_table(operator, space.basis, grid)
    sup = 0.0 if exact else float(np.max(residuals, initial=0.0))
    symbol = ellipticity_check(operator, grid)
    passed = sup <= tol and symbol.passed
    logger.info("Verification: residual sup %.3e, symbol min %.3e, passed=%s", sup, symbol.min_modulus, passed)
    return VerificationReport(
        residual_sup=sup,
        tol=tol,
        exact=exact,
        worst=_offenders(residuals, grid),
        symbol=symbol,
        passed=passed,
    )


def analyze_space(space: FunctionSpace, grid: Optional[GridSpec] = None, tol: Optional[float] = None) -> tuple[AnalyzeReport, RankField]:
    """k*, the rank field and the greedy spanning tuple at every grid point."""
    tol = get_settings().rank_tol if tol is None else tol
    grid = grid or _grid_for(space, None)
    table = DerivativeTable(space)
    k_star = jet_closure_order(space, table)
    field = rank_field(space, grid, k_star, tol, table=table)
    stack = jet_stack(table, grid, k_star)
    points = []
    for p in range(grid.size):
        point = grid.point(p)
        span = spanning_functionals(jets_at_index(stack, grid, p, k_star), tol)
        points.append(PointRank(
            x=[str(c) for c in point.coords],
            component=point.component,
            r=int(field.ranks[p]),
            q=int(field.q_min[p]),
            chosen_indices=_span_out(span.indices),
        ))
    report = AnalyzeReport(
        k_star=k_star,
        grid=grid.resolution,
        points=points,
        histogram=field.histogram(),
        constant_rank=field.constant_rank,
        constant_order=field.constant_order,
    )
    return report, field


def sobolev_summary(space: FunctionSpace, k: int, cover: Optional[ChartCover] = None, trials: int = 50) -> SobolevReport:
    if k < 1:
        raise InvalidInputError("Sobolev summaries need k >= 1.")
    mode = space.mode
    gram = sobolev_gram(space, k)
    rows = gram.tolist()
    constant = norm_equivalence_constant(space, k)
    certificate = {
        key: (_scalar_out(value, mode) if key == "constant" else value)
        for key, value in dimension_certificate(space, k).items()
    }
    cover_equivalence = None
    if cover is not None:
        if space.dimension != 1:
            raise InvalidInputError("Arc covers are only defined on the circle.")
        cover_equivalence = measure_cover_equivalence(cover, k, trials)
    return SobolevReport(
        k=k,
        gram=[[_scalar_out(v, mode) for v in row] for row in rows],
        constant=_scalar_out(constant, mode),
        constant_float=float(constant),
        ratios=mode_divergence(k, max(2, space.max_frequency())),
        certificate=certificate,
        cover_equivalence=cover_equivalence,
    )


def stratification_summary(
    space: FunctionSpace,
    grid: Optional[GridSpec] = None,
    tol: Optional[float] = None,
) -> StratificationReport:
    """The descending chain and its defining functions, without building an operator."""
    settings = get_settings()
    tol = settings.rank_tol if tol is None else tol
    grid = grid or _grid_for(space, None)
    table = DerivativeTable(space)
    k_star = jet_closure_order(space, table)
    strat = stratify(space, grid, k_star, tol, table, stage_limit=settings.stage_limit)
    defining = [defining_function(space, stage, grid) for stage in strat.stages]
    return StratificationReport(stages=_stage_reports(strat, defining), q=strat.order)


def witness_summary(n_max: int, order: Optional[int] = None) -> WitnessReport:
    """
    Jets of the truncated counterexample at every 1/n and, for ``order`` d, the
    refutation of E = sum_{k<=d} d^k, cross-checked by finite differences.
    """
    f = witness.build_counterexample(n_max)
    jets = witness.witness_jets(f)
    refutation = None
    if order is not None:
        result = witness.refute_operator(order, [1.0] * (order + 1), f)
        x = 1.0 / order
        step = witness.default_step(f, x, order)
        finite = sum(witness.richardson_derivative(f, x, k, step) for k in range(order + 1))
        refutation = {
            "d": result.order,
            "value": result.value,
            "leading": result.leading,
            "bound": result.bound,
            "certified": result.certified,
            "finite_difference": finite,
        }
    return WitnessReport(
        n_max=n_max,
        centers={str(p.n): str(p.center) for p in f.pieces},
        half_widths={str(p.n): p.half_width for p in f.pieces},
        jets={str(n): [float(v) for v in values] for n, values in jets.items()},
        refutation=refutation,
    )
