"""
Evaluate methods over captured tensors stored in a trace file.

A trace carries ``q`` (d_h or g x d_h), ``K`` and ``V`` (S x d_h) and optionally
``q_history`` (S x d_h or g x S x d_h) for methods that replay the decode
stream. Without a history the evaluated query is replayed at every step.
"""
import numpy as np

from sparq_bench.errors import TraceShapeError
from sparq_bench.harness.sweep import run_sweep
from sparq_bench.harness.workload import SyntheticWorkload
from sparq_bench.logger import logger
from sparq_bench.models.sweep import ReportRow, SweepSpec
from sparq_bench.models.trace import TraceDType, TraceFile, TraceTensor


def _tensor(trace: TraceFile, name: str) -> np.ndarray:
    tensor = trace.get(name)
    if tensor is None:
        raise TraceShapeError(f"trace has no {name!r} tensor, found {trace.names}")
    return tensor.data


def workload_from_trace(trace: TraceFile) -> SyntheticWorkload:
    keys, values = _tensor(trace, "K"), _tensor(trace, "V")
    queries = _tensor(trace, "q")
    if keys.ndim != 2 or keys.shape[0] < 1:
        raise TraceShapeError(f"K must be S x d_h with S >= 1, got shape {keys.shape}")
    if values.shape != keys.shape:
        raise TraceShapeError(f"V shape {values.shape} does not match K shape {keys.shape}")
    S, d_h = keys.shape

    queries = np.atleast_2d(queries)
    if queries.ndim != 2 or queries.shape[1] != d_h:
        raise TraceShapeError(f"q must hold vectors of length {d_h}, got shape {_tensor(trace, 'q').shape}")
    g = queries.shape[0]

    history_tensor = trace.get("q_history")
    if history_tensor is None:
        history = np.broadcast_to(queries[:, None, :], (g, S, d_h)).copy()
    else:
        history = history_tensor.data
        if history.ndim == 2:
            history = history[None, :, :]
        if history.shape != (g, S, d_h):
            raise TraceShapeError(
                f"q_history must be {(g, S, d_h)} or {(S, d_h)}, got shape {history_tensor.data.shape}"
            )
    return SyntheticWorkload(queries=queries, keys=keys, values=values, query_history=history)


def workload_to_trace(workload: SyntheticWorkload, dtype: TraceDType = TraceDType.F64) -> TraceFile:
    queries = workload.queries[0] if workload.g == 1 else workload.queries
    history = workload.query_history[0] if workload.g == 1 else workload.query_history
    tensors = [
        TraceTensor(name="q", data=queries, dtype=dtype),
        TraceTensor(name="K", data=workload.keys, dtype=dtype),
        TraceTensor(name="V", data=workload.values, dtype=dtype),
        TraceTensor(name="q_history", data=history, dtype=dtype),
    ]
    return TraceFile(tensors=tensors)


def trace_sweep_spec(workload: SyntheticWorkload, spec: SweepSpec) -> SweepSpec:
    """The sweep actually run over a trace: its shape grids are replaced by the traced tensors' shape."""
    return spec.model_copy(update={"seq_lens": [workload.S], "d_h": workload.d_h, "g": workload.g, "trials": 1})


def trace_eval(trace: TraceFile, spec: SweepSpec) -> list[ReportRow]:
    """Run the methods, ranks and budgets of ``spec`` over the traced tensors.

    The sequence length, head dimension and group size come from the trace;
    the sweep's grids over them are replaced (see ``trace_sweep_spec``).
    """
    workload = workload_from_trace(trace)
    spec = trace_sweep_spec(workload, spec)
    logger.info("Evaluating trace", extra={"S": workload.S, "d_h": workload.d_h, "g": workload.g})
    return run_sweep(spec, provide=lambda S, trial: workload)
