"""
Ramiforge - Shared Command Helpers
Cover resolution, argument parsing and report rendering.
"""

from typing import Any, Dict, List, TextIO, Tuple
import csv
import json
import logging

from pydantic import BaseModel, ValidationError

from ramiforge.config import settings
from ramiforge.models import Report
from ramiforge.services.cover import CoverData
from ramiforge.services.cover_file import load_cover

logger = logging.getLogger(__name__)


def open_cover(name: str) -> Tuple[CoverData, str]:
    """Load a cover given as a path or as the name of a bundled file."""
    return load_cover(settings.resolve_cover_path(name))


def validation_detail(error: ValidationError) -> str:
    return "; ".join(err["msg"] for err in error.errors())


def dump(model: BaseModel) -> Dict[str, Any]:
    return model.model_dump(mode="json")


def build_report(argv: List[str], digests: Dict[str, str], result: Any = None,
                 table: List[Dict[str, Any]] = None, caveats: List[str] = None) -> Report:
    unique = list(dict.fromkeys(caveats or []))
    for caveat in unique:
        logger.warning(f"Caveat: {caveat}")
    return Report(command=argv, input_digests=digests, result=result, table=table or [], caveats=unique)


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (dict, list)):
        return json.dumps(value, ensure_ascii=False, sort_keys=True)
    return str(value)


def write_report(report: Report, fmt: str, stream: TextIO) -> None:
    """
    JSON writes the whole report; TSV writes the table rows (or the result
    as one row) followed by caveats as comment lines.
    """
    if fmt == "json":
        stream.write(report.model_dump_json(indent=2))
        stream.write("\n")
        return

    rows = report.table
    if not rows and isinstance(report.result, dict):
        rows = [report.result]
    if rows:
        columns = list(dict.fromkeys(key for row in rows for key in row))
        writer = csv.DictWriter(stream, fieldnames=columns, delimiter="\t", lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({key: _cell(row.get(key)) for key in columns})
    for caveat in report.caveats:
        stream.write(f"# caveat: {caveat}\n")
