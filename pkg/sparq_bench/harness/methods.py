"""
Runs any attention method over one workload and reconciles its ledger.

SparQ runs once per KV head for the whole query group. Dense and the baselines
run once per query head; each call is reconciled on its own and the ledger of
the first head stands for the group.
"""
import numpy as np
from pydantic import BaseModel, ConfigDict

from sparq_bench.core.attention import dense_attention, sparq_attention, sparq_attention_gqa
from sparq_bench.core.baselines import H2OState, flexgen_attention, h2o_attention, lm_infinite_attention
from sparq_bench.core.costmodel import analytic_breakdown, reconcile
from sparq_bench.core.kvcache import KVCacheHead
from sparq_bench.errors import LedgerDivergenceError
from sparq_bench.harness.workload import SyntheticWorkload
from sparq_bench.logger import logger
from sparq_bench.models.attention import AttentionOutput
from sparq_bench.models.config import AttentionHeadConfig
from sparq_bench.models.costmodel import Method
from sparq_bench.models.ledger import TransferCategory, TransferLedger


class MethodRun(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    method: Method
    outputs: list[AttentionOutput]
    ledger: TransferLedger
    analytic: dict[TransferCategory, int]

    @property
    def transfers(self) -> int:
        return sum(self.analytic.values())


def replay_h2o(
    query: np.ndarray,
    history: np.ndarray,
    workload: SyntheticWorkload,
    k: int,
    l: int,  # noqa: E741
) -> AttentionOutput:
    """Decode the workload position by position so H2O builds its scores.

    The history query for position t attends once position t is appended; the
    evaluated query attends at the final step.
    """
    cache = KVCacheHead(workload.d_h, capacity=workload.S)
    state = H2OState.initial(k, l)
    output = None
    for t in range(workload.S):
        cache.append(workload.keys[t], workload.values[t])
        step_query = query if t == workload.S - 1 else history[t]
        output, state = h2o_attention(step_query, state, cache)
    assert output is not None
    return output


def _single_head(
    method: Method,
    query: np.ndarray,
    history: np.ndarray,
    workload: SyntheticWorkload,
    cache: KVCacheHead,
    cfg: AttentionHeadConfig,
) -> AttentionOutput:
    match method:
        case Method.DENSE:
            return dense_attention(query, cache)
        case Method.H2O:
            return replay_h2o(query, history, workload, cfg.k, cfg.l)
        case Method.LM_INF:
            return lm_infinite_attention(query, cache, cfg.k)
        case Method.FLEXGEN:
            return flexgen_attention(query, cache, cfg.k)
    raise ValueError(f"{method.value} is not a per-head method")


def run_method(
    method: Method,
    workload: SyntheticWorkload,
    cache: KVCacheHead,
    cfg: AttentionHeadConfig,
) -> MethodRun:
    """Run ``method`` for every query head of ``workload`` and check transfers against the closed form."""
    S, d_h = cache.S, cache.d_h
    analytic = analytic_breakdown(method, S, d_h, r=cfg.r, k=cfg.k, reallocate_mean=cfg.use_mean_reallocation)

    if method is Method.SPARQ:
        if workload.g == 1:
            output = sparq_attention(workload.queries[0], cache, cfg)
            outputs, ledgers = [output], [output.ledger_delta]
        else:
            grouped = sparq_attention_gqa(workload.queries, cache, cfg)
            outputs, ledgers = grouped.outputs, [grouped.ledger]
    else:
        outputs = [
            _single_head(method, query, history, workload, cache, cfg)
            for query, history in zip(workload.queries, workload.query_history, strict=True)
        ]
        ledgers = [output.ledger_delta for output in outputs]

    for head, ledger in enumerate(ledgers):
        try:
            reconcile(ledger, analytic)
        except LedgerDivergenceError:
            logger.error("Ledger check failed", extra={"method": method.value, "S": S, "d_h": d_h, "head": head})
            raise
    return MethodRun(method=method, outputs=outputs, ledger=ledgers[0], analytic=analytic)
