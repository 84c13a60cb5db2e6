from enum import IntEnum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from sparq_bench.constants import TRACE_DTYPE_F32, TRACE_DTYPE_F64, TRACE_VERSION


class TraceDType(IntEnum):
    F32 = TRACE_DTYPE_F32
    F64 = TRACE_DTYPE_F64

    @property
    def numpy_dtype(self) -> np.dtype:
        return np.dtype("<f4") if self is TraceDType.F32 else np.dtype("<f8")


class TraceTensor(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    name: str = Field(..., min_length=1)
    data: np.ndarray
    dtype: TraceDType = TraceDType.F64


class TraceFile(BaseModel):
    version: int = TRACE_VERSION
    tensors: list[TraceTensor] = Field(default_factory=list)

    def get(self, name: str) -> TraceTensor | None:
        for tensor in self.tensors:
            if tensor.name == name:
                return tensor
        return None

    @property
    def names(self) -> list[str]:
        return [tensor.name for tensor in self.tensors]
