from enum import Enum

from pydantic import BaseModel, Field, model_validator

from sparq_bench.logger import logger


class TemperatureRule(str, Enum):
    L1_COVERAGE = "l1_coverage"
    HEAD_DIM = "head_dim"
    RANK = "rank"


class AttentionHeadConfig(BaseModel):
    d_h: int = Field(..., ge=1, description="Head dimension")
    g: int = Field(default=1, ge=1, description="Grouped-query heads per KV head")
    r: int = Field(..., ge=1, description="Number of query components used for approximate scores")
    k: int = Field(..., ge=1, description="Number of positions fetched in full")
    l: int = Field(default=0, ge=0, description="Local window length, always selected")  # noqa: E741
    reallocate_mean: bool | None = Field(
        default=None, description="Interpolate with the mean value; default on iff g == 1"
    )
    temperature_rule: TemperatureRule = TemperatureRule.L1_COVERAGE
    dual_layout: bool = Field(default=True, description="Charge K as stored in both layouts")

    @model_validator(mode="after")
    def _check_ranges(self) -> "AttentionHeadConfig":
        if self.l > self.k:
            raise ValueError(f"local window l={self.l} exceeds k={self.k}")
        if self.r > self.d_h:
            logger.warning("Clamping rank to head dimension", extra={"requested_r": self.r, "d_h": self.d_h})
            self.r = self.d_h
        return self

    @property
    def use_mean_reallocation(self) -> bool:
        if self.reallocate_mean is None:
            return self.g == 1
        return self.reallocate_mean
