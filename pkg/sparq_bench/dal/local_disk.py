import os
from typing import TextIO

from sparq_bench.dal.interface import IReportDataAccess, ITraceDataAccess
from sparq_bench.dal.trace_codec import decode_trace, encode_trace
from sparq_bench.models.trace import TraceFile


def _ensure_parent(location: str):
    parent = os.path.dirname(location)
    if parent:
        os.makedirs(parent, exist_ok=True)


class TraceLocalDiskDataAccess(ITraceDataAccess):
    def get_trace(self, location: str) -> TraceFile:
        with open(location, "rb") as file:
            blob = file.read()
        return decode_trace(blob)

    def store_trace(self, trace: TraceFile, location: str) -> str:
        _ensure_parent(location)
        with open(location, "wb") as file:
            file.write(encode_trace(trace))
        return location


class ReportLocalDiskDataAccess(IReportDataAccess):
    def store_report(self, report: str, location: str) -> str:
        _ensure_parent(location)
        # newline="" keeps "\n" line endings on every platform
        with open(location, "w", encoding="utf-8", newline="") as file:
            file.write(report)
        return location


class ReportStreamDataAccess(IReportDataAccess):
    def __init__(self, stream: TextIO):
        self.stream = stream

    def store_report(self, report: str, location: str) -> str:
        self.stream.write(report)
        self.stream.flush()
        return location
