"""
Per-head key/value cache.

Keys are kept in two layouts: position-major (S x d_h, one row per position) and
component-major (d_h x S, one row per head component). Both are written on every
append so step 1 of SparQ can read r component rows contiguously while step 2
reads whole key vectors. The running mean of the values is updated incrementally.
"""
import numpy as np

from sparq_bench.core.numkernel import as_mat64, as_vec64
from sparq_bench.errors import InvalidParameterError, ShapeMismatchError
from sparq_bench.models.cache import CacheStats
from sparq_bench.models.ledger import TransferCategory, TransferLedger

_INITIAL_CAPACITY = 16


class KVCacheHead:
    def __init__(
        self,
        d_h: int,
        charge_mean_update: bool = True,
        dual_layout: bool = True,
        capacity: int = _INITIAL_CAPACITY,
    ):
        if d_h < 1:
            raise InvalidParameterError(f"head dimension must be positive, got {d_h}")
        self._d_h = d_h
        self._S = 0
        self._capacity = max(1, capacity)
        self._k_seq = np.zeros((self._capacity, d_h), dtype=np.float64)
        self._k_dim = np.zeros((d_h, self._capacity), dtype=np.float64)
        self._v = np.zeros((self._capacity, d_h), dtype=np.float64)
        self._v_mean = np.zeros(d_h, dtype=np.float64)
        self.charge_mean_update = charge_mean_update
        self.dual_layout = dual_layout
        self.ledger = TransferLedger()

    @classmethod
    def from_arrays(
        cls,
        keys: np.ndarray,
        values: np.ndarray,
        charge_mean_update: bool = True,
        dual_layout: bool = True,
    ) -> "KVCacheHead":
        keys = as_mat64(keys)
        values = as_mat64(values)
        if keys.shape != values.shape:
            raise ShapeMismatchError(f"keys {keys.shape} and values {values.shape} differ")
        cache = cls(
            keys.shape[1],
            charge_mean_update=charge_mean_update,
            dual_layout=dual_layout,
            capacity=max(_INITIAL_CAPACITY, keys.shape[0]),
        )
        for key, value in zip(keys, values, strict=True):
            cache.append(key, value)
        return cache

    @property
    def d_h(self) -> int:
        return self._d_h

    @property
    def S(self) -> int:
        return self._S

    @property
    def K_seq_major(self) -> np.ndarray:
        return self._k_seq[: self._S]

    @property
    def K_dim_major(self) -> np.ndarray:
        return self._k_dim[:, : self._S]

    @property
    def V(self) -> np.ndarray:
        return self._v[: self._S]

    @property
    def v_mean(self) -> np.ndarray:
        return self._v_mean

    def _grow(self) -> None:
        # capacity changes are not algorithmic transfers and are never charged
        new_capacity = self._capacity * 2
        k_seq = np.zeros((new_capacity, self._d_h), dtype=np.float64)
        k_dim = np.zeros((self._d_h, new_capacity), dtype=np.float64)
        v = np.zeros((new_capacity, self._d_h), dtype=np.float64)
        k_seq[: self._S] = self._k_seq[: self._S]
        k_dim[:, : self._S] = self._k_dim[:, : self._S]
        v[: self._S] = self._v[: self._S]
        self._k_seq, self._k_dim, self._v = k_seq, k_dim, v
        self._capacity = new_capacity

    def append(self, key: np.ndarray, value: np.ndarray) -> "KVCacheHead":
        key = as_vec64(key)
        value = as_vec64(value)
        if key.shape != (self._d_h,) or value.shape != (self._d_h,):
            raise ShapeMismatchError(f"expected key and value of length {self._d_h}, got {key.shape}, {value.shape}")
        if self._S == self._capacity:
            self._grow()

        position = self._S
        self._k_seq[position] = key
        self._k_dim[:, position] = key
        self._v[position] = value
        self._v_mean = (position * self._v_mean + value) / (position + 1)
        self._S = position + 1

        self.ledger.charge_write(TransferCategory.KV_APPEND, 2 * self._d_h)
        if self.dual_layout:
            self.ledger.charge_write(TransferCategory.DUAL_LAYOUT, self._d_h)
        if self.charge_mean_update:
            self.ledger.charge_read(TransferCategory.MEAN_VECTOR, self._d_h)
            self.ledger.charge_write(TransferCategory.MEAN_VECTOR, self._d_h)
        return self

    def snapshot_stats(self) -> CacheStats:
        # two key layouts, values and the mean vector
        return CacheStats(S=self._S, d_h=self._d_h, memory_elements=3 * self._S * self._d_h + self._d_h)
