"""
Seeded synthetic decode-step workloads.

Keys and values are standard normal. Query components are standard normal or,
in heavy mode, Student-t with 3 degrees of freedom to mimic the outlier-heavy
query activations of real models.
"""
from collections.abc import Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict

from sparq_bench.core.kvcache import KVCacheHead
from sparq_bench.errors import InvalidParameterError
from sparq_bench.models.sweep import TailKind

HEAVY_TAIL_DOF = 3

SeedLike = int | Sequence[int] | np.random.SeedSequence


class SyntheticWorkload(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    queries: np.ndarray  # g x d_h
    keys: np.ndarray  # S x d_h
    values: np.ndarray  # S x d_h
    query_history: np.ndarray  # g x S x d_h, query used at each earlier position

    @property
    def S(self) -> int:
        return self.keys.shape[0]

    @property
    def d_h(self) -> int:
        return self.keys.shape[1]

    @property
    def g(self) -> int:
        return self.queries.shape[0]

    def cache(self, charge_mean_update: bool = True, dual_layout: bool = True) -> KVCacheHead:
        return KVCacheHead.from_arrays(
            self.keys, self.values, charge_mean_update=charge_mean_update, dual_layout=dual_layout
        )


def _draw_queries(rng: np.random.Generator, tail: TailKind, shape: tuple[int, ...]) -> np.ndarray:
    if tail is TailKind.HEAVY:
        return rng.standard_t(HEAVY_TAIL_DOF, size=shape)
    return rng.standard_normal(shape)


def synth_workload(
    S: int, d_h: int, g: int = 1, tail: TailKind = TailKind.HEAVY, seed: SeedLike = 0
) -> SyntheticWorkload:
    if S < 1 or d_h < 1 or g < 1:
        raise InvalidParameterError(f"S, d_h and g must be positive, got S={S}, d_h={d_h}, g={g}")
    rng = np.random.default_rng(seed)
    keys = rng.standard_normal((S, d_h))
    values = rng.standard_normal((S, d_h))
    queries = _draw_queries(rng, tail, (g, d_h))
    history = _draw_queries(rng, tail, (g, S, d_h))
    return SyntheticWorkload(queries=queries, keys=keys, values=values, query_history=history)
