import click

from app.crud.cover import parse_cover
from app.routes.common import basis_argument, emit_report, handle_errors, load_space, mode_option, report_option
from app.services.pipeline import sobolev_summary


@click.command("sobolev")
@basis_argument
@click.option("--k", "k", type=int, required=True, help="Sobolev order.")
@click.option("--cover", "cover_path", type=click.Path(dir_okay=False), default=None, help="Arc cover file (circle only).")
@click.option("--trials", type=int, default=50, show_default=True, help="Random samples for the cover comparison.")
@mode_option
@report_option
@handle_errors
def sobolev(basis, k, cover_path, trials, mode, report_path):
    """H^k Gram matrix and the constant C with ||f||_{H^k} <= C ||f||_{L^2} on S."""
    space = load_space(basis, mode)
    cover = parse_cover(cover_path) if cover_path else None
    report = sobolev_summary(space, k, cover, trials)
    click.echo(f"k={k} C={report.constant} (~{report.constant_float:.12g})")
    if report.cover_equivalence:
        click.echo(f"cover equivalence K={report.cover_equivalence['K']:.6g}")
    emit_report(report, report_path)
