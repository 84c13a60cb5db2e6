"""
Quality metrics for approximate attention and statistics of query activations.
"""
import math

import numpy as np

from sparq_bench.core.numkernel import argtopk, as_vec64
from sparq_bench.errors import DegenerateDistributionError, InvalidParameterError, ShapeMismatchError
from sparq_bench.models.sweep import ComponentStrategy


def topk_agreement(true_scores: np.ndarray, approx_scores: np.ndarray, k: int) -> float:
    """Fraction of the true top-k positions that the approximate scores also rank in their top-k."""
    true_scores = as_vec64(true_scores)
    approx_scores = as_vec64(approx_scores)
    if true_scores.shape != approx_scores.shape:
        raise ShapeMismatchError(f"score vectors differ in length: {true_scores.shape} vs {approx_scores.shape}")
    if not 1 <= k <= true_scores.shape[0]:
        raise InvalidParameterError(f"k must lie in [1, {true_scores.shape[0]}], got {k}")
    common = np.intersect1d(argtopk(true_scores, k), argtopk(approx_scores, k), assume_unique=True)
    return common.shape[0] / k


def selection_agreement(true_scores: np.ndarray, selected: np.ndarray) -> float:
    """Fraction of a selected position set that lies in the true top-|selected|."""
    true_scores = as_vec64(true_scores)
    selected = np.asarray(selected, dtype=np.int64)
    if selected.size == 0:
        raise InvalidParameterError("empty selection")
    common = np.intersect1d(argtopk(true_scores, selected.shape[0]), selected, assume_unique=True)
    return common.shape[0] / selected.shape[0]


def fisher_kurtosis(x: np.ndarray) -> float:
    """Excess kurtosis m4 / m2^2 - 3 from population moments."""
    x = as_vec64(np.ravel(x))
    if x.shape[0] < 4:
        raise InvalidParameterError(f"kurtosis needs at least 4 samples, got {x.shape[0]}")
    centred = x - np.mean(x)
    m2 = float(np.mean(centred**2))
    if m2 == 0.0:
        raise DegenerateDistributionError("zero variance")
    m4 = float(np.mean(centred**4))
    return m4 / m2**2 - 3.0


def outlier_mass_ratio(x: np.ndarray, z: float = 3.0) -> float:
    """Share of components beyond z standard deviations, relative to a Gaussian's share."""
    x = as_vec64(np.ravel(x))
    std = float(np.std(x))
    if std == 0.0:
        raise DegenerateDistributionError("zero variance")
    observed = float(np.mean(np.abs(x - np.mean(x)) > z * std))
    return observed / math.erfc(z / math.sqrt(2.0))


def topk_mass(scores: np.ndarray, k: int) -> float:
    scores = as_vec64(scores)
    return math.fsum(scores[argtopk(scores, k)].tolist())


def relative_error(y: np.ndarray, reference: np.ndarray) -> float:
    diff = float(np.linalg.norm(y - reference))
    scale = float(np.linalg.norm(reference))
    return diff / scale if scale > 0.0 else diff


def select_components(
    queries: np.ndarray,
    r: int,
    strategy: ComponentStrategy = ComponentStrategy.TOP_MAGNITUDE,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Query components for step 1; ``queries`` is one query or a g x d_h group."""
    magnitudes = np.abs(np.atleast_2d(np.asarray(queries, dtype=np.float64))).sum(axis=0)
    d_h = magnitudes.shape[0]
    r = min(r, d_h)
    match strategy:
        case ComponentStrategy.TOP_MAGNITUDE:
            return argtopk(magnitudes, r)
        case ComponentStrategy.FIRST:
            return np.arange(r, dtype=np.int64)
        case ComponentStrategy.RANDOM:
            if rng is None:
                raise InvalidParameterError("random component selection needs a generator")
            return np.sort(rng.choice(d_h, size=r, replace=False)).astype(np.int64)
    raise InvalidParameterError(f"unknown component strategy {strategy}")
