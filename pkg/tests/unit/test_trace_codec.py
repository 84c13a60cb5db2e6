import struct

import numpy as np
import pytest

from sparq_bench.dal.in_memory import ReportDataAccessInMemory, TraceDataAccessInMemory
from sparq_bench.dal.local_disk import ReportLocalDiskDataAccess, TraceLocalDiskDataAccess
from sparq_bench.dal.trace_codec import decode_trace, encode_trace
from sparq_bench.errors import TraceParseError
from sparq_bench.models.trace import TraceDType, TraceFile, TraceTensor


@pytest.fixture
def trace(rng):
    return TraceFile(
        tensors=[
            TraceTensor(name="q", data=rng.standard_normal(4)),
            TraceTensor(name="K", data=rng.standard_normal((6, 4))),
            TraceTensor(name="V", data=rng.standard_normal((6, 4)).astype(np.float32), dtype=TraceDType.F32),
        ]
    )


def single_vector_blob():
    return encode_trace(TraceFile(tensors=[TraceTensor(name="q", data=np.arange(4.0))]))


def header_blob(name, dims, dtype=TraceDType.F64):
    encoded = name.encode("utf-8")
    header = b"SPQTRACE" + struct.pack("<II", 1, len(encoded)) + encoded + struct.pack("<I", len(dims))
    return header + b"".join(struct.pack("<Q", dim) for dim in dims) + struct.pack("<B", dtype.value)


class TestEncodeDecode:
    def test_layout(self):
        blob = single_vector_blob()
        assert blob[:8] == b"SPQTRACE"
        assert struct.unpack_from("<I", blob, 8)[0] == 1
        assert len(blob) == 8 + 4 + 4 + 1 + 4 + 8 + 1 + 4 * 8
        assert blob[29] == TraceDType.F64.value

    def test_round_trip(self, trace):
        decoded = decode_trace(encode_trace(trace))
        assert decoded.names == ["q", "K", "V"]
        np.testing.assert_array_equal(decoded.get("K").data, trace.get("K").data)
        assert decoded.get("V").dtype is TraceDType.F32

    def test_f32_widened_exactly(self, trace):
        decoded = decode_trace(encode_trace(trace)).get("V")
        assert decoded.data.dtype == np.float64
        np.testing.assert_array_equal(decoded.data, trace.get("V").data.astype(np.float64))

    def test_scalar_tensor(self):
        blob = encode_trace(TraceFile(tensors=[TraceTensor(name="tau", data=np.array(2.5))]))
        assert decode_trace(blob).get("tau").data.shape == ()

    def test_empty_trace(self):
        assert decode_trace(encode_trace(TraceFile())).tensors == []


class TestParseErrors:
    def test_truncated_payload(self):
        with pytest.raises(TraceParseError, match="declares 4 elements") as excinfo:
            decode_trace(single_vector_blob()[:50])
        assert excinfo.value.offset == 21

    @pytest.mark.parametrize(
        "dims, message",
        [
            ((2**64 - 1,), "unsupported dims"),
            ((2**32, 2**32), "more than the remaining"),
            ((2**62, 4), "more than the remaining"),
        ],
    )
    def test_oversized_dims(self, dims, message):
        with pytest.raises(TraceParseError, match=message) as excinfo:
            decode_trace(header_blob("q", dims) + bytes(16))
        assert excinfo.value.offset == 21

    def test_zero_sized_tensor_with_huge_dimension(self):
        with pytest.raises(TraceParseError, match="unsupported dims") as excinfo:
            decode_trace(header_blob("q", (0, 2**64 - 1)))
        assert excinfo.value.offset == 21

    def test_empty_dimension_is_allowed(self):
        decoded = decode_trace(header_blob("q", (0, 4)))
        assert decoded.get("q").data.shape == (0, 4)

    def test_truncated_header(self):
        with pytest.raises(TraceParseError) as excinfo:
            decode_trace(b"SPQTR")
        assert excinfo.value.offset == 0

    def test_bad_magic(self):
        with pytest.raises(TraceParseError, match="bad magic") as excinfo:
            decode_trace(b"NOTATRCE" + single_vector_blob()[8:])
        assert excinfo.value.offset == 0

    def test_unsupported_version(self):
        blob = bytearray(single_vector_blob())
        struct.pack_into("<I", blob, 8, 2)
        with pytest.raises(TraceParseError, match="version") as excinfo:
            decode_trace(bytes(blob))
        assert excinfo.value.offset == 8

    def test_unknown_dtype(self):
        blob = bytearray(single_vector_blob())
        blob[29] = 7
        with pytest.raises(TraceParseError, match="dtype") as excinfo:
            decode_trace(bytes(blob))
        assert excinfo.value.offset == 29

    def test_duplicate_tensor(self):
        blob = single_vector_blob()
        with pytest.raises(TraceParseError, match="duplicate") as excinfo:
            decode_trace(blob + blob[12:])
        assert excinfo.value.offset == len(blob)

    def test_invalid_name(self):
        blob = bytearray(single_vector_blob())
        blob[16] = 0xFF
        with pytest.raises(TraceParseError, match="utf-8"):
            decode_trace(bytes(blob))


class TestTraceDataAccess:
    def test_in_memory(self, trace):
        dal = TraceDataAccessInMemory()
        dal.store_trace(trace, "run-1")
        assert dal.get_bytes("run-1") == encode_trace(trace)
        assert dal.get_trace("run-1").names == trace.names

    def test_in_memory_missing(self):
        with pytest.raises(ValueError, match="not found"):
            TraceDataAccessInMemory().get_trace("nowhere")

    def test_local_disk(self, trace, tmp_path):
        dal = TraceLocalDiskDataAccess()
        location = dal.store_trace(trace, str(tmp_path / "traces" / "run.spqt"))
        np.testing.assert_array_equal(dal.get_trace(location).get("q").data, trace.get("q").data)


class TestReportDataAccess:
    def test_in_memory(self):
        dal = ReportDataAccessInMemory()
        dal.store_report("a,b\n1,2\n", "report")
        assert dal.get_report("report") == "a,b\n1,2\n"

    def test_local_disk_keeps_line_endings(self, tmp_path):
        location = ReportLocalDiskDataAccess().store_report("a,b\n1,2\n", str(tmp_path / "out" / "report.csv"))
        with open(location, "rb") as file:
            assert file.read() == b"a,b\n1,2\n"
