import hashlib
from enum import Enum
from typing import Literal

from pydantic import BaseModel, Field, field_validator

from sparq_bench.constants import DEFAULT_RANKS, DEFAULT_SEED, DEFAULT_TOPK, DEFAULT_TRIALS, H2O_LOCAL_FRACTION
from sparq_bench.models.config import TemperatureRule
from sparq_bench.models.costmodel import Method


class TailKind(str, Enum):
    GAUSSIAN = "gaussian"
    HEAVY = "heavy"


class ComponentStrategy(str, Enum):
    TOP_MAGNITUDE = "top_magnitude"
    FIRST = "first"
    RANDOM = "random"


def _positive_grid(values: list[int]) -> list[int]:
    if not values:
        raise ValueError("grid must not be empty")
    if any(v < 1 for v in values):
        raise ValueError(f"grid values must be positive, got {values}")
    return values


class SweepSpec(BaseModel):
    methods: list[Method] = Field(..., min_length=1)
    seq_lens: list[int] = Field(..., description="Sequence length grid")
    d_h: int = Field(..., ge=1)
    g: int = Field(default=1, ge=1)
    ranks: list[int] = Field(default_factory=lambda: list(DEFAULT_RANKS))
    topks: list[int] = Field(default_factory=lambda: list(DEFAULT_TOPK))
    local: int | Literal["k/4"] = Field(default="k/4", description="Fixed local window or k/4")
    trials: int = Field(default=DEFAULT_TRIALS, ge=1)
    seed: int = DEFAULT_SEED
    tail: TailKind = TailKind.HEAVY
    reallocate_mean: bool | None = None
    temperature_rule: TemperatureRule = TemperatureRule.L1_COVERAGE

    @field_validator("seq_lens", "ranks", "topks")
    @classmethod
    def _check_grids(cls, values: list[int]) -> list[int]:
        return _positive_grid(values)

    @field_validator("local")
    @classmethod
    def _check_local(cls, value: int | str) -> int | str:
        if isinstance(value, int) and value < 0:
            raise ValueError(f"local window must be non-negative, got {value}")
        return value

    def local_for(self, k: int) -> int:
        if self.local == "k/4":
            return k // H2O_LOCAL_FRACTION
        return min(self.local, k)

    def spec_hash(self) -> str:
        return hashlib.sha256(self.model_dump_json().encode("utf-8")).hexdigest()[:16]


class ReportRow(BaseModel):
    method: Method
    S: int
    d_h: int
    g: int
    r: int | None = None
    k: int | None = None
    l: int | None = None  # noqa: E741
    transfers: int
    dense_transfers: int
    compression_ratio: float
    theoretical_speedup: float
    mean_topk_agreement: float
    output_rel_error_vs_dense: float
    trials: int
    spec_hash: str

    def sort_key(self) -> tuple:
        return (self.method.value, self.S, self.r or 0, self.k or 0, self.l or 0)


class AgreementSpec(BaseModel):
    seq_len: int = Field(..., ge=1)
    d_h: int = Field(..., ge=1)
    g: int = Field(default=1, ge=1)
    ranks: list[int] = Field(default_factory=lambda: list(DEFAULT_RANKS))
    k: int = Field(..., ge=1)
    trials: int = Field(default=DEFAULT_TRIALS, ge=1)
    seed: int = DEFAULT_SEED
    tail: TailKind = TailKind.HEAVY
    strategies: list[ComponentStrategy] = Field(default_factory=lambda: [ComponentStrategy.TOP_MAGNITUDE], min_length=1)
    temperature_rule: TemperatureRule = TemperatureRule.L1_COVERAGE

    @field_validator("ranks")
    @classmethod
    def _check_ranks(cls, values: list[int]) -> list[int]:
        return _positive_grid(values)


class AgreementRow(BaseModel):
    strategy: ComponentStrategy
    S: int
    d_h: int
    r: int
    k: int
    trials: int
    mean_topk_agreement: float
    std_topk_agreement: float
    mean_alpha_error: float
    mean_query_kurtosis: float
    mean_query_outlier_ratio: float

    def sort_key(self) -> tuple:
        return (self.strategy.value, self.r, self.k)
