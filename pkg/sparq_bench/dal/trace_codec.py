"""
Little-endian binary trace format for captured q/K/V tensors.

    magic    8 bytes  b"SPQTRACE"
    version  u32
    entries until end of file:
        name length u32, name bytes (utf-8)
        rank u32, dims u64 x rank
        dtype u8 (0 = f32, 1 = f64)
        payload, row-major, product(dims) x dtype width bytes

Decoded tensors are widened to float64; the stored dtype is kept on the tensor.
"""
import math
import struct

import numpy as np

from sparq_bench.constants import TRACE_MAGIC, TRACE_VERSION
from sparq_bench.errors import TraceParseError
from sparq_bench.models.trace import TraceDType, TraceFile, TraceTensor

_U8 = struct.Struct("<B")
_U32 = struct.Struct("<I")
_U64 = struct.Struct("<Q")
_MAX_DIM = np.iinfo(np.intp).max


def encode_trace(trace: TraceFile) -> bytes:
    chunks = [TRACE_MAGIC, _U32.pack(trace.version)]
    for tensor in trace.tensors:
        name = tensor.name.encode("utf-8")
        data = np.ascontiguousarray(tensor.data, dtype=tensor.dtype.numpy_dtype)
        chunks.append(_U32.pack(len(name)))
        chunks.append(name)
        chunks.append(_U32.pack(data.ndim))
        chunks.extend(_U64.pack(dim) for dim in data.shape)
        chunks.append(_U8.pack(tensor.dtype.value))
        chunks.append(data.tobytes(order="C"))
    return b"".join(chunks)


class _Reader:
    def __init__(self, blob: bytes):
        self.blob = blob
        self.offset = 0

    @property
    def at_end(self) -> bool:
        return self.offset >= len(self.blob)

    def take(self, size: int, what: str) -> bytes:
        if self.offset + size > len(self.blob):
            raise TraceParseError(
                f"truncated {what}: need {size} bytes, {len(self.blob) - self.offset} left", self.offset
            )
        chunk = self.blob[self.offset : self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt: struct.Struct, what: str) -> int:
        return fmt.unpack(self.take(fmt.size, what))[0]


def _decode_tensor(reader: _Reader) -> TraceTensor:
    start = reader.offset
    name_len = reader.unpack(_U32, "name length")
    try:
        name = reader.take(name_len, "tensor name").decode("utf-8")
    except UnicodeDecodeError as exc:
        raise TraceParseError("tensor name is not valid utf-8", start + _U32.size) from exc
    if not name:
        raise TraceParseError("empty tensor name", start)

    rank = reader.unpack(_U32, "rank")
    dims_offset = reader.offset
    dims = tuple(reader.unpack(_U64, "dimension") for _ in range(rank))

    dtype_offset = reader.offset
    code = reader.unpack(_U8, "dtype code")
    try:
        dtype = TraceDType(code)
    except ValueError as exc:
        raise TraceParseError(f"unknown dtype code {code}", dtype_offset) from exc

    # python ints, so a product of u64 dims cannot wrap around
    count = math.prod(dims)
    if any(dim > _MAX_DIM for dim in dims):
        raise TraceParseError(f"tensor {name!r} has unsupported dims {dims}", dims_offset)
    remaining = len(reader.blob) - reader.offset
    if count * dtype.numpy_dtype.itemsize > remaining:
        raise TraceParseError(
            f"tensor {name!r} declares {count} elements, more than the remaining {remaining} bytes hold", dims_offset
        )
    payload = reader.take(count * dtype.numpy_dtype.itemsize, f"payload of {name!r}")
    data = np.frombuffer(payload, dtype=dtype.numpy_dtype).reshape(dims).astype(np.float64)
    return TraceTensor(name=name, data=data, dtype=dtype)


def decode_trace(blob: bytes) -> TraceFile:
    reader = _Reader(blob)
    if reader.take(len(TRACE_MAGIC), "magic") != TRACE_MAGIC:
        raise TraceParseError("bad magic, not a trace file", 0)
    version_offset = reader.offset
    version = reader.unpack(_U32, "version")
    if version != TRACE_VERSION:
        raise TraceParseError(f"unsupported trace version {version}", version_offset)

    tensors: list[TraceTensor] = []
    while not reader.at_end:
        start = reader.offset
        tensor = _decode_tensor(reader)
        if any(existing.name == tensor.name for existing in tensors):
            raise TraceParseError(f"duplicate tensor {tensor.name!r}", start)
        tensors.append(tensor)
    return TraceFile(version=version, tensors=tensors)
