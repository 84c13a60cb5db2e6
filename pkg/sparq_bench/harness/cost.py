"""
Analytic-only tables: transfers per method and the roofline view of whole models.
"""
from sparq_bench.constants import ROOFLINE_CONFIGS
from sparq_bench.core.costmodel import (
    analytic_transfers,
    arithmetic_intensity,
    attention_transfer_fraction,
    bandwidth_bound,
    bytes_view,
    compression_ratio,
    max_intensity,
    theoretical_speedup,
)
from sparq_bench.models.costmodel import CostRow, HardwareSpec, Method, ModelShape, RooflineRow


def cost_rows(
    methods: list[Method],
    seq_lens: list[int],
    d_h: int,
    ranks: list[int],
    topks: list[int],
    reallocate_mean: bool = True,
    element_width: int = 2,
) -> list[CostRow]:
    rows = []
    for method in methods:
        for S in seq_lens:
            dense = analytic_transfers(Method.DENSE, S, d_h)
            grid: list[tuple[int | None, int | None]]
            if method is Method.DENSE:
                grid = [(None, None)]
            elif method is Method.SPARQ:
                grid = [(r, k) for r in ranks for k in topks]
            else:
                grid = [(None, k) for k in topks]
            for r, k in grid:
                transfers = analytic_transfers(method, S, d_h, r=r, k=k, reallocate_mean=reallocate_mean)
                rows.append(
                    CostRow(
                        method=method,
                        S=S,
                        d_h=d_h,
                        r=min(r, d_h) if r is not None else None,
                        k=k,
                        transfers=transfers,
                        dense_transfers=dense,
                        compression_ratio=compression_ratio(method, S, d_h, r=r, k=k, reallocate_mean=reallocate_mean),
                        theoretical_speedup=theoretical_speedup(
                            method, S, d_h, r=r, k=k, reallocate_mean=reallocate_mean
                        ),
                        transfer_bytes=bytes_view(transfers, element_width),
                    )
                )
    rows.sort(key=CostRow.sort_key)
    return rows


def roofline_rows(
    hw: HardwareSpec,
    configs: list[tuple[int, int, int]] | None = None,
    batch: float = 1,
) -> list[RooflineRow]:
    """One row per (g, d_m, S) configuration."""
    rows = []
    for g, d_m, S in configs or ROOFLINE_CONFIGS:
        shape = ModelShape(d_m=d_m, S=S, B=batch, g=g)
        bound = bandwidth_bound(shape, hw)
        rows.append(
            RooflineRow(
                g=g,
                d_m=d_m,
                S=S,
                B=batch,
                rho=shape.rho,
                attention_transfer_fraction=attention_transfer_fraction(shape),
                intensity=arithmetic_intensity(shape),
                max_intensity=max_intensity(shape),
                hardware=hw.name,
                machine_balance=bound.machine_balance,
                is_bandwidth_bound=bound.is_bandwidth_bound,
                time_lower_bound_s=bound.time_lower_bound_s,
            )
        )
    return rows
