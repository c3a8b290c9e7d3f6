from typing import Optional

import click

from app.core.logging import configure_logging
from app.routes.analyze import analyze
from app.routes.annihilate import annihilate
from app.routes.sobolev import sobolev
from app.routes.stratify import stratify
from app.routes.verify import verify
from app.routes.witness import witness


@click.group()
@click.option(
    "--log-level", type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False), default=None,
    help="Overrides ANNIHILATOR_LOG_LEVEL.",
)
def cli(log_level: Optional[str]):
    """Elliptic annihilators for finite-dimensional spaces of trigonometric polynomials."""
    configure_logging(log_level)


# Register subcommands
cli.add_command(analyze)
cli.add_command(sobolev)
cli.add_command(annihilate)
cli.add_command(verify)
cli.add_command(witness)
cli.add_command(stratify)


if __name__ == "__main__":
    cli()
