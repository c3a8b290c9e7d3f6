from fractions import Fraction

from pydantic import ValidationError

from app.core.errors import InvalidInputError
from app.core.scalars import parse_rational
from app.crud.basis import PathLike, load_document, validation_message
from app.models.cover import Arc, ChartCover
from app.schemas.cover import CoverFile
from app.services.sobolev import make_arc_cover


def parse_cover(path: PathLike) -> ChartCover:
    """Arc cover of the circle; centers given as rational strings stay exact."""
    document = load_document(path)
    try:
        schema = CoverFile.model_validate(document)
    except ValidationError as exc:
        raise InvalidInputError(f"Invalid cover file {path}:\n{validation_message(exc)}") from exc
    arcs = [
        Arc(parse_rational(arc.center) if isinstance(arc.center, str) else Fraction(arc.center).limit_denominator(10**12), arc.radius)
        for arc in schema.arcs
    ]
    return make_arc_cover(arcs, schema.quadrature)
