import click

from app.routes.common import emit_report, handle_errors, report_option
from app.services.pipeline import witness_summary


@click.command("witness")
@click.option("--nmax", "n_max", type=int, default=6, show_default=True, help="Largest bump index.")
@click.option("--order", type=int, default=None, help="Refute the order-d operator sum_k d^k.")
@report_option
@handle_errors
def witness(n_max, order, report_path):
    """Smooth non-analytic counterexample and the operators it refutes."""
    report = witness_summary(n_max, order)
    for n, jets in report.jets.items():
        click.echo(f"n={n} center={report.centers[n]} f^({n})={jets[-1]:.12g}")
    if report.refutation:
        r = report.refutation
        click.echo(f"order {r['d']}: Ef(1/{r['d']}) = {r['value']:.12g} (bound {r['bound']:.6g}, certified={r['certified']})")
    emit_report(report, report_path)
