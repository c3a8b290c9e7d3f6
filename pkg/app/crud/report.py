from pathlib import Path

import orjson
from pydantic import BaseModel

from app.crud.basis import PathLike

JSON_OPTIONS = orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY


def dump_json(report: BaseModel) -> bytes:
    """Deterministic bytes: sorted keys, two-space indent."""
    return orjson.dumps(report.model_dump(mode="json"), option=JSON_OPTIONS)


def write_report(report: BaseModel, path: PathLike) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_bytes(dump_json(report))
    return target
