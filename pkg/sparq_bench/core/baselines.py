"""
Comparison methods over the same cache and ledger: H2O eviction, LM-Infinite
windowing and FlexGen exact-score top-k.
"""
import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from sparq_bench.constants import H2O_LOCAL_FRACTION, LM_INFINITE_SINK_TOKENS
from sparq_bench.core.attention import check_query, dense_scores, effective_k
from sparq_bench.core.kvcache import KVCacheHead
from sparq_bench.core.numkernel import argtopk, gather_rows, matvec, stable_softmax, vecmat
from sparq_bench.errors import InvalidParameterError
from sparq_bench.logger import logger
from sparq_bench.models.attention import AttentionOutput, SparseSelection
from sparq_bench.models.ledger import TransferCategory, TransferLedger


class H2OState(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    k: int = Field(..., ge=1, description="Retention budget")
    l: int = Field(..., ge=0, description="Most recent positions never evicted")  # noqa: E741
    retained: np.ndarray = Field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    cum_scores: np.ndarray = Field(default_factory=lambda: np.zeros(0, dtype=np.float64))
    seen: int = Field(default=0, ge=0, description="Cache length at the previous call")

    @model_validator(mode="after")
    def _check_consistent(self) -> "H2OState":
        if self.l > self.k:
            raise ValueError(f"local window l={self.l} exceeds budget k={self.k}")
        if self.retained.shape != self.cum_scores.shape:
            raise ValueError("cum_scores must align with retained positions")
        return self

    @classmethod
    def initial(cls, k: int, l: int | None = None) -> "H2OState":  # noqa: E741
        return cls(k=k, l=k // H2O_LOCAL_FRACTION if l is None else l)


def _evict(retained: np.ndarray, cum_scores: np.ndarray, k: int, window_start: int) -> tuple[np.ndarray, np.ndarray]:
    while retained.shape[0] > k:
        candidates = np.flatnonzero(retained < window_start)
        # argmin keeps the first minimum, i.e. the smallest position on ties
        victim = candidates[np.argmin(cum_scores[candidates])]
        retained = np.delete(retained, victim)
        cum_scores = np.delete(cum_scores, victim)
    return retained, cum_scores


def h2o_attention(q: np.ndarray, state: H2OState, cache: KVCacheHead) -> tuple[AttentionOutput, H2OState]:
    """Attend over the heavy hitters plus the local window, then evict down to k.

    The state must have been produced against this cache; positions appended
    since the last call join the retained set with zero accumulated score.
    """
    q = check_query(q, cache)
    S = cache.S
    if state.seen > S:
        raise InvalidParameterError(f"H2O state has seen {state.seen} positions but the cache holds {S}")

    retained = np.concatenate([state.retained, np.arange(state.seen, S, dtype=np.int64)])
    cum_scores = np.concatenate([state.cum_scores, np.zeros(S - state.seen, dtype=np.float64)])
    # the newest position is always kept, even when l is 0
    retained, cum_scores = _evict(retained, cum_scores, state.k, S - max(min(state.l, state.k), 1))

    s = stable_softmax(matvec(gather_rows(cache.K_seq_major, retained), q), math.sqrt(cache.d_h))
    y = vecmat(s, gather_rows(cache.V, retained))

    ledger = TransferLedger()
    ledger.charge_read(TransferCategory.K_COLUMNS, retained.shape[0] * cache.d_h)
    ledger.charge_read(TransferCategory.V, retained.shape[0] * cache.d_h)
    ledger.charge_write(TransferCategory.KV_APPEND, 2 * cache.d_h)
    ledger.charge_read(TransferCategory.SCORE_BOOKKEEPING, S)
    ledger.charge_write(TransferCategory.SCORE_BOOKKEEPING, S)

    next_state = state.model_copy(update={"retained": retained, "cum_scores": cum_scores + s, "seen": S})
    output = AttentionOutput(
        y=y, selection=SparseSelection(i2=retained, alpha=1.0, s_exact=s), ledger_delta=ledger
    )
    return output, next_state


def lm_infinite_positions(S: int, k: int) -> np.ndarray:
    if S <= k:
        return np.arange(S, dtype=np.int64)
    sinks = LM_INFINITE_SINK_TOKENS
    if k <= sinks:
        sinks = k - 1
        logger.warning(
            "Budget too small for the attention sinks, keeping the newest position",
            extra={"k": k, "sinks": sinks},
        )
    recent = k - sinks
    return np.concatenate([np.arange(sinks, dtype=np.int64), np.arange(S - recent, S, dtype=np.int64)])


def lm_infinite_attention(q: np.ndarray, cache: KVCacheHead, k: int) -> AttentionOutput:
    q = check_query(q, cache)
    i2 = lm_infinite_positions(cache.S, k)
    s = stable_softmax(matvec(gather_rows(cache.K_seq_major, i2), q), math.sqrt(cache.d_h))
    y = vecmat(s, gather_rows(cache.V, i2))

    ledger = TransferLedger()
    ledger.charge_read(TransferCategory.K_COLUMNS, i2.shape[0] * cache.d_h)
    ledger.charge_read(TransferCategory.V, i2.shape[0] * cache.d_h)
    ledger.charge_write(TransferCategory.KV_APPEND, 2 * cache.d_h)
    return AttentionOutput(y=y, selection=SparseSelection(i2=i2, alpha=1.0, s_exact=s), ledger_delta=ledger)


def flexgen_attention(q: np.ndarray, cache: KVCacheHead, k: int, renormalize: bool = False) -> AttentionOutput:
    s = dense_scores(q, cache)
    k = effective_k(k, cache.S)
    i2 = argtopk(s, k)
    weights = s[i2]
    alpha = min(1.0, float(np.sum(weights)))
    if renormalize:
        weights = weights / np.sum(weights)
    y = vecmat(weights, gather_rows(cache.V, i2))

    ledger = TransferLedger()
    ledger.charge_read(TransferCategory.K_COLUMNS, cache.S * cache.d_h)
    ledger.charge_read(TransferCategory.V, k * cache.d_h)
    ledger.charge_write(TransferCategory.KV_APPEND, 2 * cache.d_h)
    return AttentionOutput(y=y, selection=SparseSelection(i2=i2, alpha=alpha, s_exact=weights), ledger_delta=ledger)
