"""
Deterministic numeric primitives shared by every attention implementation.

All math runs on float64 numpy arrays. Products accumulate sequentially in
ascending index order so results are bit-reproducible across runs.
"""
import math
from collections.abc import Sequence

import numpy as np

from sparq_bench.errors import (
    BadTemperatureError,
    EmptyLogitsError,
    IndexOutOfRangeError,
    InvalidParameterError,
    NonFiniteInputError,
    ShapeMismatchError,
)


def as_vec64(values: Sequence[float] | np.ndarray) -> np.ndarray:
    vec = np.asarray(values, dtype=np.float64)
    if vec.ndim != 1:
        raise ShapeMismatchError(f"expected a vector, got shape {vec.shape}")
    if not np.all(np.isfinite(vec)):
        raise NonFiniteInputError("vector contains NaN or Inf")
    return vec


def as_mat64(values: Sequence[Sequence[float]] | np.ndarray) -> np.ndarray:
    mat = np.asarray(values, dtype=np.float64)
    if mat.ndim != 2:
        raise ShapeMismatchError(f"expected a matrix, got shape {mat.shape}")
    if not np.all(np.isfinite(mat)):
        raise NonFiniteInputError("matrix contains NaN or Inf")
    return mat


def as_index_list(indices: Sequence[int] | np.ndarray, bound: int) -> np.ndarray:
    idx = np.asarray(indices, dtype=np.int64).reshape(-1)
    if idx.size and (idx[0] < 0 or idx[-1] >= bound):
        raise IndexOutOfRangeError(f"indices must lie in [0, {bound})")
    if idx.size > 1 and not np.all(np.diff(idx) > 0):
        raise InvalidParameterError("index list must be strictly increasing")
    return idx


def l1_norm(x: np.ndarray) -> float:
    # exactly rounded, so the sum does not depend on where zeros sit in x
    return math.fsum(np.abs(x).tolist())


def stable_softmax(x: np.ndarray, temperature: float = 1.0) -> np.ndarray:
    if x.size == 0:
        raise EmptyLogitsError("softmax of an empty vector")
    if not temperature > 0.0:
        raise BadTemperatureError(f"temperature must be positive, got {temperature}")
    if temperature >= 1.0:
        # scaling first keeps the spread finite when x spans the whole float64 range
        z = x / temperature
        z = z - np.max(z)
    else:
        z = (x - np.max(x)) / temperature
    e = np.exp(z)
    return e / np.sum(e)


def argtopk(x: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k largest values, ascending; ties go to the smaller index."""
    if k < 0:
        raise InvalidParameterError(f"k must be non-negative, got {k}")
    n = x.shape[0]
    if k >= n:
        return np.arange(n, dtype=np.int64)
    order = np.argsort(-x, kind="stable")
    return np.sort(order[:k]).astype(np.int64)


def gather_rows(m: np.ndarray, idx: np.ndarray) -> np.ndarray:
    idx = np.asarray(idx, dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= m.shape[0]):
        raise IndexOutOfRangeError(f"row index outside [0, {m.shape[0]})")
    return m[idx]


def matvec(m: np.ndarray, x: np.ndarray) -> np.ndarray:
    rows, cols = m.shape
    if x.shape != (cols,):
        raise ShapeMismatchError(f"matrix {m.shape} cannot multiply vector {x.shape}")
    out = np.zeros(rows, dtype=np.float64)
    for j in range(cols):
        out += m[:, j] * x[j]
    return out


def vecmat(x: np.ndarray, m: np.ndarray) -> np.ndarray:
    rows, cols = m.shape
    if x.shape != (rows,):
        raise ShapeMismatchError(f"vector {x.shape} cannot multiply matrix {m.shape}")
    out = np.zeros(cols, dtype=np.float64)
    for i in range(rows):
        out += x[i] * m[i, :]
    return out
