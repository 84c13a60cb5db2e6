"""
Dense reference attention and the three-step SparQ Attention algorithm.

Step 1 approximates the scores of every position from the r largest-magnitude
query components, step 2 fetches the k best positions in full (plus the local
window) and step 3 interpolates the sparse output with the running mean value.
Each step charges the elements it transfers to a TransferLedger.
"""
import math

import numpy as np

from sparq_bench.constants import LOCAL_MASK_BOOST
from sparq_bench.core.kvcache import KVCacheHead
from sparq_bench.core.numkernel import (
    argtopk,
    as_index_list,
    as_mat64,
    as_vec64,
    gather_rows,
    l1_norm,
    matvec,
    stable_softmax,
    vecmat,
)
from sparq_bench.errors import EmptyCacheError, ShapeMismatchError
from sparq_bench.logger import logger
from sparq_bench.models.attention import ApproxScores, AttentionOutput, GroupedAttentionOutput, SparseSelection
from sparq_bench.models.config import AttentionHeadConfig, TemperatureRule
from sparq_bench.models.ledger import TransferCategory, TransferLedger


def check_query(q: np.ndarray, cache: KVCacheHead) -> np.ndarray:
    q = as_vec64(q)
    if q.shape != (cache.d_h,):
        raise ShapeMismatchError(f"query of length {q.shape[0]} does not match head dimension {cache.d_h}")
    if cache.S == 0:
        raise EmptyCacheError("attention over an empty cache")
    return q


def effective_k(k: int, S: int) -> int:
    if k > S:
        logger.warning("Clamping k to sequence length", extra={"requested_k": k, "S": S})
        return S
    return k


def local_mask(S: int, l: int) -> np.ndarray:  # noqa: E741
    """LOCAL_MASK_BOOST on the last l positions, zero elsewhere."""
    mask = np.zeros(S, dtype=np.float64)
    if l > 0:
        mask[max(0, S - l) :] = LOCAL_MASK_BOOST
    return mask


def select_positions(scores: np.ndarray, k: int, l: int) -> np.ndarray:  # noqa: E741
    """argtopk(scores + local_mask(S, l), k) for scores in [0, 1).

    The local window always wins, so it is taken whole and the remaining k - l
    slots go to the best earlier positions. Splitting it this way keeps the
    window guaranteed even when a score rounds to exactly 1.0.
    """
    S = scores.shape[0]
    k = min(k, S)
    l = min(l, k)  # noqa: E741
    window_start = S - l
    earlier = argtopk(scores[:window_start], k - l)
    return np.concatenate([earlier, np.arange(window_start, S, dtype=np.int64)])


def _temperature(q: np.ndarray, i1: np.ndarray, d_h: int, rule: TemperatureRule) -> float | None:
    """None when the query is all zeros (scores are then uniform)."""
    q_l1 = l1_norm(q)
    if q_l1 == 0.0:
        return None
    if rule is TemperatureRule.HEAD_DIM:
        return math.sqrt(d_h)
    if rule is TemperatureRule.RANK:
        return math.sqrt(i1.shape[0])
    return math.sqrt(d_h * l1_norm(q[i1]) / q_l1)


def _approximate(q: np.ndarray, i1: np.ndarray, cache: KVCacheHead, cfg: AttentionHeadConfig) -> ApproxScores:
    tau = _temperature(q, i1, cache.d_h, cfg.temperature_rule)
    if tau is None:
        return ApproxScores(i1=i1, tau=math.sqrt(cache.d_h), s_hat=np.full(cache.S, 1.0 / cache.S))
    logits = vecmat(q[i1], gather_rows(cache.K_dim_major, i1))
    return ApproxScores(i1=i1, tau=tau, s_hat=stable_softmax(logits, tau))


def _charge_component_reads(ledger: TransferLedger, cache: KVCacheHead, r: int, cfg: AttentionHeadConfig) -> None:
    ledger.charge_read(TransferCategory.K_ROWS, cache.S * r)
    if not cfg.dual_layout:
        ledger.charge_strided(cache.S * r)


def _exact_scores(q: np.ndarray, i2: np.ndarray, cache: KVCacheHead) -> np.ndarray:
    logits = matvec(gather_rows(cache.K_seq_major, i2), q)
    return stable_softmax(logits, math.sqrt(cache.d_h))


def _charge_step_writes(ledger: TransferLedger, d_h: int, reallocate: bool, dual_layout: bool) -> None:
    ledger.charge_write(TransferCategory.KV_APPEND, 2 * d_h)
    if reallocate:
        ledger.charge_read(TransferCategory.MEAN_VECTOR, d_h)
        ledger.charge_write(TransferCategory.MEAN_VECTOR, d_h)
    if dual_layout:
        ledger.charge_write(TransferCategory.DUAL_LAYOUT, d_h)


def _interpolate(selection: SparseSelection, cache: KVCacheHead, reallocate: bool) -> np.ndarray:
    y_sparse = vecmat(selection.s_exact, gather_rows(cache.V, selection.i2))
    if not reallocate:
        return y_sparse
    return selection.alpha * y_sparse + (1.0 - selection.alpha) * cache.v_mean


def dense_scores(q: np.ndarray, cache: KVCacheHead) -> np.ndarray:
    q = check_query(q, cache)
    return stable_softmax(matvec(cache.K_seq_major, q), math.sqrt(cache.d_h))


def dense_attention(q: np.ndarray, cache: KVCacheHead) -> AttentionOutput:
    s = dense_scores(q, cache)
    y = vecmat(s, cache.V)

    ledger = TransferLedger()
    ledger.charge_read(TransferCategory.K_COLUMNS, cache.S * cache.d_h)
    ledger.charge_read(TransferCategory.V, cache.S * cache.d_h)
    ledger.charge_write(TransferCategory.KV_APPEND, 2 * cache.d_h)

    selection = SparseSelection(i2=np.arange(cache.S, dtype=np.int64), alpha=1.0, s_exact=s)
    return AttentionOutput(y=y, selection=selection, ledger_delta=ledger)


def sparq_step1(
    q: np.ndarray,
    cache: KVCacheHead,
    cfg: AttentionHeadConfig,
    ledger: TransferLedger | None = None,
    components: np.ndarray | None = None,
) -> ApproxScores:
    q = check_query(q, cache)
    if components is None:
        i1 = argtopk(np.abs(q), cfg.r)
    else:
        i1 = as_index_list(components, cache.d_h)
    if ledger is not None:
        _charge_component_reads(ledger, cache, i1.shape[0], cfg)
    return _approximate(q, i1, cache, cfg)


def sparq_step2(
    approx: ApproxScores,
    q: np.ndarray,
    cache: KVCacheHead,
    cfg: AttentionHeadConfig,
    ledger: TransferLedger | None = None,
) -> SparseSelection:
    q = check_query(q, cache)
    if approx.s_hat.shape != (cache.S,):
        raise ShapeMismatchError(f"approximate scores cover {approx.s_hat.shape[0]} positions, cache has {cache.S}")
    k = effective_k(cfg.k, cache.S)
    i2 = select_positions(approx.s_hat, k, cfg.l)
    alpha = min(1.0, float(np.sum(approx.s_hat[i2])))
    if ledger is not None:
        ledger.charge_read(TransferCategory.K_COLUMNS, k * cache.d_h)
        ledger.charge_read(TransferCategory.V, k * cache.d_h)
    return SparseSelection(i2=i2, alpha=alpha, s_exact=_exact_scores(q, i2, cache))


def sparq_step3(
    selection: SparseSelection,
    cache: KVCacheHead,
    cfg: AttentionHeadConfig,
    ledger: TransferLedger | None = None,
) -> AttentionOutput:
    if ledger is None:
        ledger = TransferLedger()
    reallocate = cfg.use_mean_reallocation
    y = _interpolate(selection, cache, reallocate)
    _charge_step_writes(ledger, cache.d_h, reallocate, cfg.dual_layout)
    return AttentionOutput(y=y, selection=selection, ledger_delta=ledger)


def sparq_attention(
    q: np.ndarray,
    cache: KVCacheHead,
    cfg: AttentionHeadConfig,
    components: np.ndarray | None = None,
) -> AttentionOutput:
    ledger = TransferLedger()
    approx = sparq_step1(q, cache, cfg, ledger=ledger, components=components)
    selection = sparq_step2(approx, q, cache, cfg, ledger=ledger)
    output = sparq_step3(selection, cache, cfg, ledger=ledger)
    return output.model_copy(update={"approx": approx})


def sparq_attention_gqa(
    queries: np.ndarray,
    cache: KVCacheHead,
    cfg: AttentionHeadConfig,
    components: np.ndarray | None = None,
) -> GroupedAttentionOutput:
    """SparQ for g query heads sharing one KV head.

    Component and position selection use |q| and the approximate scores summed
    over the group; K and V are fetched once for the whole group.
    """
    queries = as_mat64(queries)
    if queries.shape != (cfg.g, cache.d_h):
        raise ShapeMismatchError(f"expected {cfg.g} queries of length {cache.d_h}, got shape {queries.shape}")
    for q in queries:
        check_query(q, cache)

    if components is None:
        i1 = argtopk(np.sum(np.abs(queries), axis=0), cfg.r)
    else:
        i1 = as_index_list(components, cache.d_h)
    approxes = [_approximate(q, i1, cache, cfg) for q in queries]

    k = effective_k(cfg.k, cache.S)
    group_scores = np.sum(np.stack([approx.s_hat for approx in approxes]), axis=0)
    i2 = select_positions(group_scores, k, cfg.l)

    reallocate = cfg.use_mean_reallocation
    outputs = []
    for q, approx in zip(queries, approxes, strict=True):
        selection = SparseSelection(
            i2=i2,
            alpha=min(1.0, float(np.sum(approx.s_hat[i2]))),
            s_exact=_exact_scores(q, i2, cache),
        )
        outputs.append(
            AttentionOutput(y=_interpolate(selection, cache, reallocate), selection=selection, approx=approx)
        )

    ledger = TransferLedger()
    _charge_component_reads(ledger, cache, i1.shape[0], cfg)
    ledger.charge_read(TransferCategory.K_COLUMNS, k * cache.d_h)
    ledger.charge_read(TransferCategory.V, k * cache.d_h)
    _charge_step_writes(ledger, cache.d_h, reallocate, cfg.dual_layout)
    return GroupedAttentionOutput(outputs=outputs, ledger=ledger)
