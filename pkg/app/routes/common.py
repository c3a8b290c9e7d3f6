"""Shared pieces of the subcommands: error-to-exit-code mapping and common options."""

import functools
import logging
from pathlib import Path
from typing import Optional

import click
from pydantic import BaseModel, ValidationError

from app.core.errors import EngineError
from app.crud import basis as crud_basis
from app.crud import report as crud_report
from app.crud.basis import validation_message
from app.models.domain import FunctionSpace
from app.models.grid import GridSpec

logger = logging.getLogger(__name__)

INVALID_INPUT = 2


def handle_errors(command):
    """Turn EngineError subclasses into their documented exit codes."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        ctx = click.get_current_context()
        try:
            return command(*args, **kwargs)
        except EngineError as exc:
            click.echo(f"error: {exc.detail}", err=True)
            ctx.exit(exc.exit_code)
        except ValidationError as exc:
            click.echo(f"error: invalid options\n{validation_message(exc)}", err=True)
            ctx.exit(INVALID_INPUT)

    return wrapper


basis_argument = click.argument("basis", type=click.Path(dir_okay=False, path_type=Path))
grid_option = click.option("--grid", "grid", type=int, default=None, help="Grid points per axis.")
tol_option = click.option("--tol", type=float, default=None, help="Residual tolerance (default from settings).")
mode_option = click.option(
    "--mode", type=click.Choice(["exact", "float"]), default=None, help="Override the mode stored in the basis file."
)
report_option = click.option(
    "--report", "report_path", type=click.Path(dir_okay=False, path_type=Path), default=None,
    help="Write the JSON report here.",
)


def load_space(path: Path, mode: Optional[str]) -> FunctionSpace:
    return crud_basis.parse_basis(path, mode)


def space_grid(space: FunctionSpace, resolution: Optional[int]) -> Optional[GridSpec]:
    if resolution is None:
        return None
    if resolution < 2:
        raise click.BadParameter("Grid resolution must be at least 2.", param_hint="--grid")
    return GridSpec(space.dimension, resolution, space.domain.count)


def emit_report(report: BaseModel, path: Optional[Path]) -> None:
    if path is not None:
        target = crud_report.write_report(report, path)
        click.echo(f"report: {target}")
