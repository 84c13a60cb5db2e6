from sparq_bench.dal.interface import IReportDataAccess, ITraceDataAccess
from sparq_bench.dal.trace_codec import decode_trace, encode_trace
from sparq_bench.models.trace import TraceFile


class TraceDataAccessInMemory(ITraceDataAccess):
    """Keeps encoded trace bytes, so reads go through the same codec as files."""

    def __init__(self):
        self._blobs: dict[str, bytes] = {}

    def get_trace(self, location: str) -> TraceFile:
        if location not in self._blobs:
            raise ValueError(f"Trace {location} not found")
        return decode_trace(self._blobs[location])

    def store_trace(self, trace: TraceFile, location: str) -> str:
        self._blobs[location] = encode_trace(trace)
        return location

    def get_bytes(self, location: str) -> bytes:
        return self._blobs[location]

    def put_bytes(self, blob: bytes, location: str):
        self._blobs[location] = blob


class ReportDataAccessInMemory(IReportDataAccess):
    def __init__(self):
        self._reports: dict[str, str] = {}

    def store_report(self, report: str, location: str) -> str:
        self._reports[location] = report
        return location

    def get_report(self, location: str) -> str:
        if location not in self._reports:
            raise ValueError(f"Report {location} not found")
        return self._reports[location]
