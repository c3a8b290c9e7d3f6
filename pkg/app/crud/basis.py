"""Read and write basis files: JSON documents validated by ``schemas.basis.BasisFile``."""

import logging
from pathlib import Path
from typing import Optional, Union

import orjson
from pydantic import ValidationError

from app.core.errors import InvalidInputError
from app.core.scalars import ScalarMode, lossy_to_float, to_scalar
from app.models.domain import Domain, FunctionSpace
from app.models.trigpoly import TrigPoly
from app.schemas.basis import BasisElementIn, BasisFile, TermIn
from app.services.funcspace import make_space

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def load_document(path: PathLike) -> dict:
    """Raw JSON object from disk; unreadable or malformed files are invalid input."""
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise InvalidInputError(f"Cannot read {path}: {exc.strerror or exc}") from exc
    try:
        document = orjson.loads(raw)
    except orjson.JSONDecodeError as exc:
        raise InvalidInputError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise InvalidInputError(f"{path} must contain a JSON object.")
    return document


def validation_message(exc: ValidationError) -> str:
    """Field-level summary, one ``location: message`` per line."""
    lines = []
    for error in exc.errors():
        location = ".".join(str(part) for part in error["loc"]) or "<root>"
        lines.append(f"{location}: {error['msg']}")
    return "\n".join(lines)


def term_coefficient(term: TermIn, mode: ScalarMode):
    if mode == "float" and isinstance(term.coeff, str):
        try:
            return lossy_to_float(term.coeff)
        except ValueError:
            return to_scalar(term.coeff, "float")
    return to_scalar(term.coeff, mode)


def element_poly(terms: list[TermIn], dimension: int, mode: ScalarMode) -> TrigPoly:
    items = [(t.freq, t.phase, term_coefficient(t, mode)) for t in terms]
    return TrigPoly.from_terms(dimension, items, mode)


def space_from_schema(document: BasisFile, mode: Optional[ScalarMode] = None) -> FunctionSpace:
    """Each basis element lives on a single component and vanishes on the others."""
    mode = mode or document.mode
    domain = Domain.torus(document.dimension, document.components)
    basis = []
    for element in document.basis:
        poly = element_poly(element.terms, document.dimension, mode)
        function = [TrigPoly.zero(document.dimension, mode)] * document.components
        function[element.component] = poly
        basis.append(tuple(function))
    return make_space(domain, basis, mode)


def parse_basis(path: PathLike, mode: Optional[ScalarMode] = None) -> FunctionSpace:
    """
    Load a basis file into a validated FunctionSpace.

    ``mode`` overrides the mode written in the file.
    """
    document = load_document(path)
    try:
        schema = BasisFile.model_validate(document)
    except ValidationError as exc:
        raise InvalidInputError(f"Invalid basis file {path}:\n{validation_message(exc)}") from exc
    space = space_from_schema(schema, mode)
    logger.info(
        "Loaded %d basis functions on %d torus component(s) of dimension %d (%s mode)",
        space.size, space.domain.count, space.dimension, space.mode,
    )
    return space


def coefficient_out(value, mode: ScalarMode):
    """Exact scalars are written as strings (``"1/3"``, ``"sqrt(2)/2"``), floats as numbers."""
    return str(value) if mode == "exact" else float(value)


def poly_terms_out(poly: TrigPoly) -> list[TermIn]:
    return [
        TermIn(freq=list(freq), phase=phase, coeff=coefficient_out(coeff, poly.mode))
        for freq, phase, coeff in poly.items()
    ]


def basis_to_schema(space: FunctionSpace) -> BasisFile:
    elements = []
    for i, function in enumerate(space.basis):
        support = [c for c, poly in enumerate(function) if not poly.is_zero]
        if len(support) > 1:
            raise InvalidInputError(
                f"Basis function {i + 1} is supported on several components; basis files hold one per element."
            )
        component = support[0] if support else 0
        elements.append(BasisElementIn(component=component, terms=poly_terms_out(function[component])))
    return BasisFile(
        dimension=space.dimension,
        components=space.domain.count,
        mode=space.mode,
        basis=elements,
    )


def write_basis(space: FunctionSpace, path: PathLike) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_bytes(orjson.dumps(basis_to_schema(space).model_dump(), option=orjson.OPT_INDENT_2))
    return target
