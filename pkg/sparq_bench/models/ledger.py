"""
Transfer accounting in scalar elements.
"""
from enum import Enum

from pydantic import BaseModel, Field

from sparq_bench.errors import InvalidParameterError


class TransferCategory(str, Enum):
    K_ROWS = "k_rows"  # r components of K for every position (step 1)
    K_COLUMNS = "k_columns"  # full key vectors for selected positions
    V = "v"
    KV_APPEND = "kv_append"
    MEAN_VECTOR = "mean_vector"
    SCORE_BOOKKEEPING = "score_bookkeeping"
    DUAL_LAYOUT = "dual_layout"  # second K write for the component-major copy


# Not part of any closed-form transfer formula
UNRECONCILED_CATEGORIES = frozenset({TransferCategory.DUAL_LAYOUT})


class TransferLedger(BaseModel):
    reads: dict[TransferCategory, int] = Field(default_factory=dict)
    writes: dict[TransferCategory, int] = Field(default_factory=dict)
    strided_reads: int = Field(default=0, description="Elements read with a non-unit stride (statistic only)")

    def charge_read(self, category: TransferCategory, elements: int) -> None:
        if elements < 0:
            raise InvalidParameterError(f"cannot charge {elements} read elements to {category.value}")
        self.reads[category] = self.reads.get(category, 0) + int(elements)

    def charge_write(self, category: TransferCategory, elements: int) -> None:
        if elements < 0:
            raise InvalidParameterError(f"cannot charge {elements} write elements to {category.value}")
        self.writes[category] = self.writes.get(category, 0) + int(elements)

    def charge_strided(self, elements: int) -> None:
        self.strided_reads += int(elements)

    @property
    def read_elements(self) -> int:
        return sum(self.reads.values())

    @property
    def write_elements(self) -> int:
        return sum(self.writes.values())

    @property
    def total(self) -> int:
        return self.read_elements + self.write_elements

    @property
    def reconciled_total(self) -> int:
        return sum(count for category, count in self.by_category().items() if category not in UNRECONCILED_CATEGORIES)

    def by_category(self) -> dict[TransferCategory, int]:
        totals = {category: 0 for category in TransferCategory}
        for category, count in self.reads.items():
            totals[category] += count
        for category, count in self.writes.items():
            totals[category] += count
        return totals

    def merge(self, other: "TransferLedger") -> "TransferLedger":
        merged = TransferLedger(reads=dict(self.reads), writes=dict(self.writes), strided_reads=self.strided_reads)
        for category, count in other.reads.items():
            merged.charge_read(category, count)
        for category, count in other.writes.items():
            merged.charge_write(category, count)
        merged.strided_reads += other.strided_reads
        return merged

    def __add__(self, other: "TransferLedger") -> "TransferLedger":
        return self.merge(other)

    def summary(self) -> dict:
        return {
            "read_elements": self.read_elements,
            "write_elements": self.write_elements,
            "total": self.total,
            "reconciled_total": self.reconciled_total,
            "strided_reads": self.strided_reads,
            "categories": {category.value: count for category, count in self.by_category().items()},
        }
