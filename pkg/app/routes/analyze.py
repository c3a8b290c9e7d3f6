import click

from app.routes.common import basis_argument, emit_report, grid_option, handle_errors, load_space, mode_option, report_option, space_grid, tol_option
from app.services.pipeline import analyze_space


@click.command("analyze")
@basis_argument
@grid_option
@tol_option
@mode_option
@report_option
@handle_errors
def analyze(basis, grid, tol, mode, report_path):
    """Jet closure order and pointwise rank structure of a basis."""
    space = load_space(basis, mode)
    report, _ = analyze_space(space, space_grid(space, grid), tol)
    click.echo(f"N={space.size} k*={report.k_star} grid={report.grid}")
    click.echo(f"rank histogram: {report.histogram}")
    click.echo(f"constant rank: {report.constant_rank}, constant spanning order: {report.constant_order}")
    emit_report(report, report_path)
