"""
Benchmark sweeps: every method over a grid of sequence lengths, ranks and budgets.

Each cell averages quality metrics over seeded trials, checks every attention
call against the closed-form transfer count and reports one row. Cells are
independent and may run on a thread pool; rows are sorted before they are
returned, so output does not depend on completion order.
"""
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor, as_completed

import numpy as np
from pydantic import BaseModel
from tqdm import tqdm

from sparq_bench.constants import SHOW_PROGRESS, SWEEP_WORKERS
from sparq_bench.core.attention import dense_attention, effective_k
from sparq_bench.core.costmodel import analytic_transfers, compression_ratio, theoretical_speedup
from sparq_bench.errors import LedgerDivergenceError
from sparq_bench.harness.methods import run_method
from sparq_bench.harness.metrics import relative_error, selection_agreement, topk_agreement
from sparq_bench.harness.workload import SyntheticWorkload, synth_workload
from sparq_bench.logger import logger
from sparq_bench.models.config import AttentionHeadConfig
from sparq_bench.models.costmodel import Method
from sparq_bench.models.sweep import ReportRow, SweepSpec

WorkloadProvider = Callable[[int, int], SyntheticWorkload]


class SweepCell(BaseModel):
    method: Method
    S: int
    r: int | None = None
    k: int | None = None
    l: int | None = None  # noqa: E741

    def describe(self) -> dict:
        return {"method": self.method.value, "S": self.S, "r": self.r, "k": self.k, "l": self.l}


def sweep_cells(spec: SweepSpec) -> list[SweepCell]:
    cells = []
    for method in spec.methods:
        for S in spec.seq_lens:
            if method is Method.DENSE:
                cells.append(SweepCell(method=method, S=S))
            elif method is Method.SPARQ:
                cells.extend(
                    SweepCell(method=method, S=S, r=r, k=k, l=spec.local_for(k)) for r in spec.ranks for k in spec.topks
                )
            elif method is Method.H2O:
                cells.extend(SweepCell(method=method, S=S, k=k, l=spec.local_for(k)) for k in spec.topks)
            else:
                cells.extend(SweepCell(method=method, S=S, k=k) for k in spec.topks)
    return cells


def synthetic_provider(spec: SweepSpec) -> WorkloadProvider:
    """Workloads depend only on (seed, S, trial), so every method sees the same data."""

    def provide(S: int, trial: int) -> SyntheticWorkload:
        return synth_workload(S, spec.d_h, spec.g, spec.tail, seed=[spec.seed, S, trial])

    return provide


def _cell_config(cell: SweepCell, spec: SweepSpec) -> AttentionHeadConfig:
    return AttentionHeadConfig(
        d_h=spec.d_h,
        g=spec.g,
        r=cell.r if cell.r is not None else spec.d_h,
        k=cell.k if cell.k is not None else cell.S,
        l=cell.l or 0,
        reallocate_mean=spec.reallocate_mean,
        temperature_rule=spec.temperature_rule,
    )


def _agreement(method: Method, true_scores: np.ndarray, output, k: int) -> float:
    if method is Method.SPARQ:
        return topk_agreement(true_scores, output.approx.s_hat, k)
    return selection_agreement(true_scores, output.selection.i2)


def evaluate_cell(cell: SweepCell, spec: SweepSpec, provide: WorkloadProvider) -> ReportRow:
    logger.debug("Evaluating sweep cell", extra=cell.describe())
    cfg = _cell_config(cell, spec)
    agreements: list[float] = []
    errors: list[float] = []
    transfers = 0
    for trial in range(spec.trials):
        workload = provide(cell.S, trial)
        cache = workload.cache()
        try:
            run = run_method(cell.method, workload, cache, cfg)
        except LedgerDivergenceError:
            logger.error("Sweep aborted on ledger divergence", extra={**cell.describe(), "trial": trial})
            raise
        transfers = run.transfers
        for query, output in zip(workload.queries, run.outputs, strict=True):
            reference = dense_attention(query, cache)
            errors.append(relative_error(output.y, reference.y))
            agreements.append(_agreement(cell.method, reference.selection.s_exact, output, effective_k(cfg.k, cell.S)))

    dense = analytic_transfers(Method.DENSE, cell.S, spec.d_h)
    closed_form = (cell.method, cell.S, spec.d_h, cfg.r, cfg.k, cfg.use_mean_reallocation)
    logger.debug("Finished sweep cell", extra={**cell.describe(), "transfers": transfers})
    return ReportRow(
        method=cell.method,
        S=cell.S,
        d_h=spec.d_h,
        g=spec.g,
        r=min(cell.r, spec.d_h) if cell.r is not None else None,
        k=cell.k,
        l=cell.l,
        transfers=transfers,
        dense_transfers=dense,
        compression_ratio=compression_ratio(*closed_form),
        theoretical_speedup=theoretical_speedup(*closed_form),
        mean_topk_agreement=float(np.mean(agreements)),
        output_rel_error_vs_dense=float(np.mean(errors)),
        trials=spec.trials,
        spec_hash=spec.spec_hash(),
    )


def run_sweep(
    spec: SweepSpec,
    provide: WorkloadProvider | None = None,
    workers: int = SWEEP_WORKERS,
    progress: bool = SHOW_PROGRESS,
) -> list[ReportRow]:
    provide = provide or synthetic_provider(spec)
    cells = sweep_cells(spec)
    logger.info("Starting sweep", extra={"cells": len(cells), "trials": spec.trials, "spec_hash": spec.spec_hash()})

    rows: list[ReportRow] = []
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        futures = [executor.submit(evaluate_cell, cell, spec, provide) for cell in cells]
        for future in tqdm(as_completed(futures), total=len(futures), desc="sweep", disable=not progress):
            rows.append(future.result())

    rows.sort(key=ReportRow.sort_key)
    logger.info("Sweep finished", extra={"rows": len(rows)})
    return rows
