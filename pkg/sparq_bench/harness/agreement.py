"""
How well the step-1 approximate scores rank positions, per component strategy and rank.
"""
from collections.abc import Callable

import numpy as np

from sparq_bench.core.attention import dense_scores, effective_k, select_positions, sparq_step1
from sparq_bench.errors import DegenerateDistributionError, InvalidParameterError
from sparq_bench.harness.metrics import (
    fisher_kurtosis,
    outlier_mass_ratio,
    select_components,
    topk_agreement,
    topk_mass,
)
from sparq_bench.harness.workload import SyntheticWorkload, synth_workload
from sparq_bench.logger import logger
from sparq_bench.models.config import AttentionHeadConfig
from sparq_bench.models.sweep import AgreementRow, AgreementSpec, ComponentStrategy


def agreement_workloads(spec: AgreementSpec) -> list[SyntheticWorkload]:
    return [
        synth_workload(spec.seq_len, spec.d_h, spec.g, spec.tail, seed=[spec.seed, trial])
        for trial in range(spec.trials)
    ]


def _query_statistic(statistic: Callable[[np.ndarray], float], query: np.ndarray) -> float:
    try:
        return statistic(query)
    except (InvalidParameterError, DegenerateDistributionError):
        return float("nan")


def _strategy_row(
    spec: AgreementSpec, strategy: ComponentStrategy, r: int, workloads: list[SyntheticWorkload]
) -> AgreementRow:
    agreements: list[float] = []
    alpha_errors: list[float] = []
    kurtoses: list[float] = []
    outlier_ratios: list[float] = []
    for trial, workload in enumerate(workloads):
        cache = workload.cache()
        cfg = AttentionHeadConfig(d_h=workload.d_h, g=workload.g, r=r, k=spec.k, temperature_rule=spec.temperature_rule)
        k = effective_k(cfg.k, cache.S)
        rng = np.random.default_rng([spec.seed, trial, r])
        components = select_components(workload.queries, cfg.r, strategy, rng=rng)
        for query in workload.queries:
            true_scores = dense_scores(query, cache)
            approx = sparq_step1(query, cache, cfg, components=components)
            alpha = float(np.sum(approx.s_hat[select_positions(approx.s_hat, k, 0)]))
            agreements.append(topk_agreement(true_scores, approx.s_hat, k))
            alpha_errors.append(abs(alpha - topk_mass(true_scores, k)))
            kurtoses.append(_query_statistic(fisher_kurtosis, query))
            outlier_ratios.append(_query_statistic(outlier_mass_ratio, query))

    return AgreementRow(
        strategy=strategy,
        S=workloads[0].S,
        d_h=workloads[0].d_h,
        r=min(r, workloads[0].d_h),
        k=spec.k,
        trials=len(workloads),
        mean_topk_agreement=float(np.mean(agreements)),
        std_topk_agreement=float(np.std(agreements)),
        mean_alpha_error=float(np.mean(alpha_errors)),
        mean_query_kurtosis=float(np.mean(kurtoses)),
        mean_query_outlier_ratio=float(np.mean(outlier_ratios)),
    )


def run_agreement(spec: AgreementSpec, workloads: list[SyntheticWorkload] | None = None) -> list[AgreementRow]:
    """Agreement rows over ``workloads``, or over seeded synthetic workloads drawn from ``spec``.

    Every strategy and rank sees the same workloads, so rows are paired comparisons.
    """
    if workloads is None:
        workloads = agreement_workloads(spec)
    logger.info(
        "Measuring top-k agreement",
        extra={"trials": len(workloads), "ranks": spec.ranks, "strategies": [s.value for s in spec.strategies]},
    )
    rows = [_strategy_row(spec, strategy, r, workloads) for strategy in spec.strategies for r in spec.ranks]
    rows.sort(key=AgreementRow.sort_key)
    return rows
