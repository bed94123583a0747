"""CSV/JSON serialization of study results.

CSV layout: a header ``level,h,ndof_fem,ndof_bem,err_h1,err_l2,err_strip,err_flux``
and one row per level. When there are at least two levels, a blank line
follows, then the EOC block with header
``from_level,to_level,eoc_h1,eoc_l2,eoc_strip,eoc_flux``; undefined orders are
left empty. Floats use 17 significant digits.

JSON: ``{"reports": [...], "eoc": [...]}`` with the same keys; undefined
orders are ``null``.
"""

from __future__ import annotations

import json
import sys

from .errors import ERROR_COLUMNS, EocRow, ErrorReport

REPORT_COLUMNS = ("level", "h", "ndof_fem", "ndof_bem") + ERROR_COLUMNS
EOC_COLUMNS = ("from_level", "to_level") + tuple("eoc_" + c[4:] for c in ERROR_COLUMNS)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    return f"{value:.17g}"


def _eoc_dict(row: EocRow) -> dict:
    out = {"from_level": row.from_level, "to_level": row.to_level}
    for col in ERROR_COLUMNS:
        out["eoc_" + col[4:]] = row.values.get(col)
    return out


def format_csv(reports: list[ErrorReport], table: list[EocRow]) -> str:
    lines = [",".join(REPORT_COLUMNS)]
    for rep in reports:
        d = rep.as_dict()
        lines.append(",".join(_fmt(d[c]) for c in REPORT_COLUMNS))
    if table:
        lines.append("")
        lines.append(",".join(EOC_COLUMNS))
        for row in table:
            d = _eoc_dict(row)
            lines.append(",".join(_fmt(d[c]) for c in EOC_COLUMNS))
    return "\n".join(lines) + "\n"


def format_json(reports: list[ErrorReport], table: list[EocRow]) -> str:
    doc = {"reports": [r.as_dict() for r in reports], "eoc": [_eoc_dict(r) for r in table]}
    return json.dumps(doc, indent=2) + "\n"


def emit_report(reports, table, fmt: str = "csv", path=None) -> str:
    """Serialize and write to ``path`` (stdout when None); returns the text."""
    if fmt == "csv":
        text = format_csv(reports, table)
    elif fmt == "json":
        text = format_json(reports, table)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
    return text


def parse_json(text: str) -> tuple[list[ErrorReport], list[EocRow]]:
    doc = json.loads(text)
    reports = [ErrorReport(**r) for r in doc["reports"]]
    table = [
        EocRow(r["from_level"], r["to_level"], {c: r["eoc_" + c[4:]] for c in ERROR_COLUMNS})
        for r in doc["eoc"]
    ]
    return reports, table
