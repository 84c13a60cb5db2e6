"""
Intermediate approximations between dense attention and the SparQ output.

``masked_output`` keeps the exact scores of a subset of positions,
``mean_corrected_output`` adds the mean value weighted by the dropped mass and
``renormalized_output`` re-normalizes the scores over the subset.
These are reference implementations for the test suite; nothing on the hot
path calls them.
"""
import math

import numpy as np

from sparq_bench.core.attention import dense_scores
from sparq_bench.core.kvcache import KVCacheHead
from sparq_bench.core.numkernel import as_index_list, as_vec64, gather_rows, matvec, stable_softmax, vecmat


def _complement(mask: np.ndarray, S: int) -> np.ndarray:
    keep = np.ones(S, dtype=bool)
    keep[mask] = False
    return np.flatnonzero(keep)


def masked_approx_scores(q: np.ndarray, cache: KVCacheHead, components: np.ndarray, tau: float) -> np.ndarray:
    """softmax((q * m_q) K^T / tau) with the component mask materialized over all of q."""
    q = as_vec64(q)
    masked = np.zeros_like(q)
    i1 = as_index_list(components, cache.d_h)
    masked[i1] = q[i1]
    return stable_softmax(matvec(cache.K_seq_major, masked), tau)


def masked_output(q: np.ndarray, cache: KVCacheHead, positions: np.ndarray) -> np.ndarray:
    s = dense_scores(q, cache)
    i2 = as_index_list(positions, cache.S)
    return vecmat(s[i2], gather_rows(cache.V, i2))


def mean_corrected_output(q: np.ndarray, cache: KVCacheHead, positions: np.ndarray) -> np.ndarray:
    s = dense_scores(q, cache)
    i2 = as_index_list(positions, cache.S)
    dropped = math.fsum(s[_complement(i2, cache.S)].tolist())
    return vecmat(s[i2], gather_rows(cache.V, i2)) + dropped * cache.v_mean


def renormalized_output(q: np.ndarray, cache: KVCacheHead, positions: np.ndarray) -> np.ndarray:
    # limit of softmax(logits + log(mask + eps)) as eps -> 0
    q = as_vec64(q)
    i2 = as_index_list(positions, cache.S)
    logits = matvec(gather_rows(cache.K_seq_major, i2), q)
    return vecmat(stable_softmax(logits, math.sqrt(cache.d_h)), gather_rows(cache.V, i2))
