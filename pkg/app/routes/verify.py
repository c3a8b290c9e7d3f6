from pathlib import Path

import click

from app.crud import operator as crud_operator
from app.routes.common import basis_argument, emit_report, grid_option, handle_errors, load_space, mode_option, report_option, space_grid, tol_option
from app.services.pipeline import verify_operator

VERIFICATION_FAILED = 1


@click.command("verify")
@click.argument("operator_path", type=click.Path(dir_okay=False, path_type=Path))
@basis_argument
@grid_option
@tol_option
@mode_option
@report_option
@handle_errors
def verify(operator_path, basis, grid, tol, mode, report_path):
    """Re-check an operator file against a basis from scratch."""
    operator, _ = crud_operator.read_operator(operator_path)
    space = load_space(basis, mode)
    report = verify_operator(operator, space, space_grid(space, grid), tol)
    click.echo(f"residual sup: {report.residual_sup!r} (tol {report.tol:.1e}){' exact' if report.exact else ''}")
    click.echo(f"symbol min: {report.symbol.min_modulus:.6g} (margin {report.symbol.margin:.1e})")
    for offender in report.worst:
        click.echo(f"  f{offender.basis_index} at c{offender.component}:({', '.join(offender.x)}) -> {offender.residual:.6g}")
    emit_report(report, report_path)
    if not report.passed:
        click.echo("verification failed", err=True)
        click.get_current_context().exit(VERIFICATION_FAILED)
