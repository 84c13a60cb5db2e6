"""
Closed-form transfer counts per method, compression ratios and the roofline model.

All counts are scalar elements per attention head per decode step. k is
clamped to S and r to d_h before any formula is evaluated, matching what the
attention implementations charge.
"""
from collections.abc import Mapping

from sparq_bench.errors import InvalidParameterError, LedgerDivergenceError, MissingParameterError
from sparq_bench.logger import logger
from sparq_bench.models.costmodel import HardwareSpec, Method, ModelShape, ReconcileReport, RooflineReport
from sparq_bench.models.ledger import UNRECONCILED_CATEGORIES, TransferCategory, TransferLedger

_NEEDS_RANK = {Method.SPARQ}
_NEEDS_TOPK = {Method.SPARQ, Method.H2O, Method.LM_INF, Method.FLEXGEN}


def analytic_breakdown(
    method: Method,
    S: int,
    d_h: int,
    r: int | None = None,
    k: int | None = None,
    reallocate_mean: bool = True,
) -> dict[TransferCategory, int]:
    if S < 1 or d_h < 1:
        raise InvalidParameterError(f"S and d_h must be positive, got S={S}, d_h={d_h}")
    if method in _NEEDS_RANK and r is None:
        raise MissingParameterError(f"{method.value} needs the rank r")
    if method in _NEEDS_TOPK and k is None:
        raise MissingParameterError(f"{method.value} needs the budget k")

    counts = {category: 0 for category in TransferCategory}
    counts[TransferCategory.KV_APPEND] = 2 * d_h
    if method is Method.DENSE:
        counts[TransferCategory.K_COLUMNS] = S * d_h
        counts[TransferCategory.V] = S * d_h
        return counts

    assert k is not None
    k = min(k, S)
    counts[TransferCategory.V] = k * d_h
    if method is Method.FLEXGEN:
        counts[TransferCategory.K_COLUMNS] = S * d_h
        return counts

    counts[TransferCategory.K_COLUMNS] = k * d_h
    if method is Method.SPARQ:
        assert r is not None
        counts[TransferCategory.K_ROWS] = S * min(r, d_h)
        if reallocate_mean:
            counts[TransferCategory.MEAN_VECTOR] = 2 * d_h
    elif method is Method.H2O:
        counts[TransferCategory.SCORE_BOOKKEEPING] = 2 * S
    return counts


def analytic_transfers(
    method: Method,
    S: int,
    d_h: int,
    r: int | None = None,
    k: int | None = None,
    reallocate_mean: bool = True,
) -> int:
    return sum(analytic_breakdown(method, S, d_h, r=r, k=k, reallocate_mean=reallocate_mean).values())


def compression_ratio(
    method: Method,
    S: int,
    d_h: int,
    r: int | None = None,
    k: int | None = None,
    reallocate_mean: bool = True,
) -> float:
    """M_method / M_dense."""
    dense = analytic_transfers(Method.DENSE, S, d_h)
    return analytic_transfers(method, S, d_h, r=r, k=k, reallocate_mean=reallocate_mean) / dense


def theoretical_speedup(
    method: Method,
    S: int,
    d_h: int,
    r: int | None = None,
    k: int | None = None,
    reallocate_mean: bool = True,
) -> float:
    return 1.0 / compression_ratio(method, S, d_h, r=r, k=k, reallocate_mean=reallocate_mean)


def bytes_view(elements: int, element_width: int) -> int:
    if element_width < 1:
        raise InvalidParameterError(f"element width must be at least one byte, got {element_width}")
    return elements * element_width


def attention_transfer_fraction(shape: ModelShape) -> float:
    """Share of transfers spent on the KV cache: rho / (rho + 6/B) for the default N and C."""
    attention = shape.B * shape.kv_elements
    return attention / (shape.params + attention)


def arithmetic_ops(shape: ModelShape) -> float:
    return shape.B * (shape.params + shape.kv_elements * shape.g)


def transfer_elements(shape: ModelShape) -> float:
    return shape.params + shape.B * shape.kv_elements


def arithmetic_intensity(shape: ModelShape) -> float:
    # (6 + rho g) / (6/B + rho) for the default N and C
    return (shape.params + shape.kv_elements * shape.g) / (shape.params / shape.B + shape.kv_elements)


def max_intensity(shape: ModelShape) -> float:
    """Limit of the arithmetic intensity as B grows: g + 6/rho for the default N and C."""
    return shape.params / shape.kv_elements + shape.g


def bound_for_counts(ops: float, transfers: float, hw: HardwareSpec) -> RooflineReport:
    intensity = ops / transfers
    return RooflineReport(
        arithmetic_ops=ops,
        transfers=transfers,
        intensity=intensity,
        machine_balance=hw.machine_balance,
        # equality counts as compute bound
        is_bandwidth_bound=intensity < hw.machine_balance,
        time_lower_bound_s=max(ops / hw.r_A, transfers / hw.r_M),
    )


def bandwidth_bound(shape: ModelShape, hw: HardwareSpec) -> RooflineReport:
    return bound_for_counts(arithmetic_ops(shape), transfer_elements(shape), hw)


def reconcile(ledger: TransferLedger, analytic: int | Mapping[TransferCategory, int]) -> ReconcileReport:
    """Check a counted ledger against a closed form.

    ``analytic`` is either a total or a per-category breakdown; with a breakdown
    a mismatch names every category that differs. Categories outside the
    closed forms (the dual-layout K write) are reported but never compared.
    """
    counted_by_category = ledger.by_category()
    categories = {category.value: count for category, count in counted_by_category.items()}
    excluded = {category.value: counted_by_category[category] for category in UNRECONCILED_CATEGORIES}
    counted = ledger.reconciled_total

    if isinstance(analytic, Mapping):
        expected = sum(count for category, count in analytic.items() if category not in UNRECONCILED_CATEGORIES)
        diff = {
            category.value: counted_by_category[category] - analytic.get(category, 0)
            for category in TransferCategory
            if category not in UNRECONCILED_CATEGORIES and counted_by_category[category] != analytic.get(category, 0)
        }
    else:
        expected = int(analytic)
        diff = {"total": counted - expected} if counted != expected else {}

    if diff:
        logger.error(
            "Ledger diverges from closed form",
            extra={"counted": counted, "analytic": expected, "diff": diff, "categories": categories},
        )
        raise LedgerDivergenceError(f"counted {counted} elements, closed form gives {expected}", diff)
    return ReconcileReport(counted=counted, analytic=expected, excluded=excluded, categories=categories)
