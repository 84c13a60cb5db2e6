from abc import ABC, abstractmethod

from sparq_bench.models.trace import TraceFile


class ITraceDataAccess(ABC):
    @abstractmethod
    def get_trace(self, location: str) -> TraceFile:
        pass

    @abstractmethod
    def store_trace(self, trace: TraceFile, location: str) -> str:
        pass


class IReportDataAccess(ABC):
    @abstractmethod
    def store_report(self, report: str, location: str) -> str:
        pass
