from enum import Enum

from pydantic import BaseModel, Field, computed_field, model_validator

from sparq_bench.constants import HARDWARE_PRESETS
from sparq_bench.errors import InvalidParameterError


class Method(str, Enum):
    DENSE = "dense"
    SPARQ = "sparq"
    H2O = "h2o"
    LM_INF = "lm_inf"
    FLEXGEN = "flexgen"


class ModelShape(BaseModel):
    d_m: int = Field(..., ge=1, description="Model dimension")
    S: int = Field(..., ge=1, description="Sequence length")
    B: float = Field(default=1, gt=0, description="Batch size")
    g: int = Field(default=1, ge=1, description="Grouped-query heads per KV head")
    N: float | None = Field(default=None, gt=0, description="Parameters per layer; 12 d_m^2 when omitted")
    C: float | None = Field(default=None, gt=0, description="KV elements per batch item; 2 S d_m / g when omitted")

    @model_validator(mode="after")
    def _fill_defaults(self) -> "ModelShape":
        if self.N is None:
            self.N = 12.0 * self.d_m**2
        if self.C is None:
            self.C = 2.0 * self.S * self.d_m / self.g
        return self

    @computed_field  # type: ignore[prop-decorator]
    @property
    def rho(self) -> float:
        return self.S / (self.g * self.d_m)

    @property
    def params(self) -> float:
        assert self.N is not None
        return self.N

    @property
    def kv_elements(self) -> float:
        assert self.C is not None
        return self.C


class HardwareSpec(BaseModel):
    name: str
    r_A: float = Field(..., gt=0, description="Multiply-adds per second")
    r_M: float = Field(..., gt=0, description="Elements transferred per second")

    @property
    def machine_balance(self) -> float:
        return self.r_A / self.r_M

    @classmethod
    def preset(cls, name: str) -> "HardwareSpec":
        if name not in HARDWARE_PRESETS:
            raise InvalidParameterError(f"unknown hardware preset {name!r}, expected one of {sorted(HARDWARE_PRESETS)}")
        return cls(name=name, **HARDWARE_PRESETS[name])


class RooflineReport(BaseModel):
    arithmetic_ops: float
    transfers: float
    intensity: float
    machine_balance: float
    is_bandwidth_bound: bool
    time_lower_bound_s: float


class ReconcileReport(BaseModel):
    counted: int
    analytic: int
    excluded: dict[str, int] = Field(default_factory=dict, description="Sub-counters outside the closed form")
    categories: dict[str, int] = Field(default_factory=dict)


class CostRow(BaseModel):
    method: Method
    S: int
    d_h: int
    r: int | None = None
    k: int | None = None
    transfers: int
    dense_transfers: int
    compression_ratio: float
    theoretical_speedup: float
    transfer_bytes: int

    def sort_key(self) -> tuple:
        return (self.method.value, self.S, self.r or 0, self.k or 0)


class RooflineRow(BaseModel):
    g: int
    d_m: int
    S: int
    B: float
    rho: float
    attention_transfer_fraction: float
    intensity: float
    max_intensity: float
    hardware: str
    machine_balance: float
    is_bandwidth_bound: bool
    time_lower_bound_s: float
