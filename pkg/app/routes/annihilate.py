from pathlib import Path

import click

from app.core.config import default_grid_resolution
from app.crud import operator as crud_operator
from app.models.grid import GridSpec
from app.routes.common import basis_argument, emit_report, grid_option, handle_errors, load_space, mode_option, tol_option
from app.schemas.options import AnnihilateOptions
from app.services.diffop import ellipticity_check
from app.services.pipeline import discover_annihilator

OPERATOR_FILE = "operator.json"
REPORT_FILE = "report.json"


@click.command("annihilate")
@basis_argument
@click.option("--method", type=click.Choice(["auto", "constant-rank", "stratified"]), default="auto", show_default=True)
@grid_option
@tol_option
@mode_option
@click.option("--elliptic-order", type=int, default=None, help="Order of the reference operator (default 2p > q).")
@click.option("--negate", is_flag=True, help="Use the negated reference operator.")
@click.option("--coeff-model", type=click.Choice(["grid", "trig"]), default="grid", show_default=True)
@click.option(
    "--coefficient-method", type=click.Choice(["direct", "dual_frame"]), default="direct", show_default=True,
    help="How patch coefficient fields are solved on the constant-rank path.",
)
@click.option("--out", "out_dir", type=click.Path(file_okay=False, path_type=Path), default=Path("out"), show_default=True)
@click.option("--timings", is_flag=True, help="Record stage timings in the report.")
@handle_errors
def annihilate(basis, method, grid, tol, mode, elliptic_order, negate, coeff_model, coefficient_method, out_dir, timings):
    """Build an elliptic operator that annihilates every function of the basis span."""
    space = load_space(basis, mode)
    options = AnnihilateOptions(
        method=method,
        grid=grid,
        tol=tol,
        elliptic_order=elliptic_order,
        negate=negate,
        coeff_model=coeff_model,
        coefficient_method=coefficient_method,
        timings=timings,
    )
    operator, report = discover_annihilator(space, options)
    grid_spec = operator.grid or GridSpec(space.dimension, grid or default_grid_resolution(space.dimension), space.domain.count)
    symbol = ellipticity_check(operator, grid_spec)
    target = crud_operator.write_operator(operator, out_dir / OPERATOR_FILE, symbol)
    report = report.model_copy(update={"operator_file": str(target)})
    click.echo(f"path: {report.path}{' (fallback)' if report.fallback_used else ''}")
    click.echo(f"operator: {report.operator}")
    click.echo(f"residual sup: {report.residual_sup:.3e}{' (exact zero)' if report.exact_residual_zero else ''}")
    click.echo(f"symbol min: {report.symbol_min:.6g}")
    emit_report(report, out_dir / REPORT_FILE)
