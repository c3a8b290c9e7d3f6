import click

from app.routes.common import basis_argument, emit_report, grid_option, handle_errors, load_space, mode_option, report_option, space_grid, tol_option
from app.services.pipeline import stratification_summary


@click.command("stratify")
@basis_argument
@grid_option
@tol_option
@mode_option
@report_option
@handle_errors
def stratify(basis, grid, tol, mode, report_path):
    """Descending chain of independence regions with their defining functions."""
    space = load_space(basis, mode)
    report = stratification_summary(space, space_grid(space, grid), tol)
    click.echo(f"{len(report.stages)} stage(s), q={report.q}")
    for stage in report.stages:
        g = "sampled" if stage.g_sampled else f"{stage.g_terms} terms"
        click.echo(f"  stage {stage.stage}: m={stage.m} span={stage.span} |V|={stage.v_count} |F_next|={stage.f_next_count} g: {g}")
    emit_report(report, report_path)
