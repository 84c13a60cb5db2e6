import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from sparq_bench.models.ledger import TransferLedger


class ApproxScores(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    i1: np.ndarray = Field(..., description="Selected query component indices, ascending")
    tau: float = Field(..., gt=0.0)
    s_hat: np.ndarray = Field(..., description="Approximate scores over all S positions")


class SparseSelection(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    i2: np.ndarray = Field(..., description="Selected positions, ascending")
    alpha: float = Field(..., ge=0.0, le=1.0, description="Score mass attributed to the selected positions")
    s_exact: np.ndarray = Field(..., description="Scores over the selected positions")


class AttentionOutput(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    y: np.ndarray
    selection: SparseSelection
    approx: ApproxScores | None = None
    ledger_delta: TransferLedger = Field(default_factory=TransferLedger)


class GroupedAttentionOutput(BaseModel):
    outputs: list[AttentionOutput]
    ledger: TransferLedger
