"""Operator files: serialization of DiffOp through ``schemas.operator.OperatorFile``."""

import logging
from pathlib import Path
from typing import Optional

import numpy as np
import orjson
from pydantic import ValidationError

from app.core.errors import InvalidInputError
from app.core.scalars import to_scalar
from app.crud.basis import PathLike, coefficient_out, element_poly, load_document, poly_terms_out, validation_message
from app.models.diffop import Analytic, Constant, DiffOp, Sampled
from app.models.grid import GridField, GridSpec
from app.models.multiindex import MultiIndex
from app.schemas.operator import ConstCoeff, GridCoeff, OperatorFile, OperatorTerm, TrigCoeff
from app.schemas.report import SymbolReport

logger = logging.getLogger(__name__)


def _coefficient_to_schema(coeff, mode: str):
    if isinstance(coeff, Constant):
        return ConstCoeff(value=coefficient_out(coeff.value, mode))
    if isinstance(coeff, Analytic):
        return TrigCoeff(components=[poly_terms_out(p) for p in coeff.polys])
    return GridCoeff(resolution=coeff.grid.resolution, values=[float(v) for v in coeff.field.values])


def operator_to_schema(op: DiffOp, symbol_report: Optional[SymbolReport] = None) -> OperatorFile:
    return OperatorFile(
        dimension=op.dimension,
        components=op.components,
        mode=op.mode,
        order=op.order,
        terms=[
            OperatorTerm(index=list(index.entries), coeff=_coefficient_to_schema(coeff, op.mode))
            for index, coeff in op.terms
        ],
        symbol_report=symbol_report,
    )


def operator_from_schema(document: OperatorFile) -> DiffOp:
    mode = document.mode
    terms = []
    for term in document.terms:
        coeff = term.coeff
        if isinstance(coeff, ConstCoeff):
            value = Constant(to_scalar(coeff.value, mode))
        elif isinstance(coeff, TrigCoeff):
            value = Analytic(tuple(element_poly(terms_in, document.dimension, mode) for terms_in in coeff.components))
        else:
            grid = GridSpec(document.dimension, coeff.resolution, document.components)
            value = Sampled(GridField(grid, np.asarray(coeff.values, dtype=float)))
        terms.append((MultiIndex(tuple(term.index)), value))
    try:
        return DiffOp.from_terms(document.dimension, terms, document.components, mode)
    except ValueError as exc:
        raise InvalidInputError(f"Invalid operator: {exc}") from exc


def write_operator(op: DiffOp, path: PathLike, symbol_report: Optional[SymbolReport] = None) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    document = operator_to_schema(op, symbol_report)
    target.write_bytes(orjson.dumps(document.model_dump(exclude_none=True), option=orjson.OPT_INDENT_2))
    logger.info("Wrote order-%d operator with %d terms to %s", op.order, len(op.terms), target)
    return target


def read_operator(path: PathLike) -> tuple[DiffOp, OperatorFile]:
    raw = load_document(path)
    try:
        document = OperatorFile.model_validate(raw)
    except ValidationError as exc:
        raise InvalidInputError(f"Invalid operator file {path}:\n{validation_message(exc)}") from exc
    return operator_from_schema(document), document
