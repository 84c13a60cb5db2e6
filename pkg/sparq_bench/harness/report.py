"""
Render report rows as CSV, JSON or an aligned text table.

Column order is fixed per row type. Output depends only on the rows, so a
seeded run renders byte-identical reports.
"""
import json
from collections.abc import Sequence
from enum import Enum

import pandas as pd
from pydantic import BaseModel

from sparq_bench.constants import AGREEMENT_COLUMNS, REPORT_COLUMNS, REPORT_FLOAT_FORMAT
from sparq_bench.models.sweep import AgreementRow, ReportRow

_OPTIONAL_INT_COLUMNS = ("r", "k", "l")


class ReportFormat(str, Enum):
    CSV = "csv"
    JSON = "json"
    TABLE = "table"


def columns_for(row_type: type[BaseModel]) -> list[str]:
    if row_type is ReportRow:
        return list(REPORT_COLUMNS)
    if row_type is AgreementRow:
        return list(AGREEMENT_COLUMNS)
    return list(row_type.model_fields)


def rows_to_frame(rows: Sequence[BaseModel], row_type: type[BaseModel]) -> pd.DataFrame:
    columns = columns_for(row_type)
    frame = pd.DataFrame([row.model_dump(mode="json") for row in rows], columns=columns)
    for column in _OPTIONAL_INT_COLUMNS:
        if column in frame.columns:
            frame[column] = frame[column].astype("Int64")
    return frame


def render(
    rows: Sequence[BaseModel],
    row_type: type[BaseModel],
    fmt: ReportFormat = ReportFormat.CSV,
    spec_hash: str | None = None,
) -> str:
    if fmt is ReportFormat.JSON:
        payload = {
            "spec_hash": spec_hash,
            "columns": columns_for(row_type),
            "rows": [row.model_dump(mode="json") for row in rows],
        }
        return json.dumps(payload, indent=2) + "\n"

    frame = rows_to_frame(rows, row_type)
    if fmt is ReportFormat.TABLE:
        return frame.to_string(index=False, float_format=lambda value: REPORT_FLOAT_FORMAT % value) + "\n"
    return frame.to_csv(index=False, float_format=REPORT_FLOAT_FORMAT, lineterminator="\n")
