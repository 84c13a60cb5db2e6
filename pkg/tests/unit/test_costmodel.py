import numpy as np
import pytest

from sparq_bench.core.attention import dense_attention, sparq_attention
from sparq_bench.core.costmodel import (
    analytic_breakdown,
    analytic_transfers,
    arithmetic_intensity,
    attention_transfer_fraction,
    bandwidth_bound,
    bound_for_counts,
    bytes_view,
    compression_ratio,
    max_intensity,
    reconcile,
    theoretical_speedup,
)
from sparq_bench.core.kvcache import KVCacheHead
from sparq_bench.errors import InvalidParameterError, LedgerDivergenceError, MissingParameterError
from sparq_bench.harness.cost import cost_rows
from sparq_bench.harness.methods import run_method
from sparq_bench.harness.workload import synth_workload
from sparq_bench.models.config import AttentionHeadConfig
from sparq_bench.models.costmodel import HardwareSpec, Method, ModelShape
from sparq_bench.models.ledger import TransferCategory, TransferLedger


class TestAnalyticTransfers:
    def test_dense(self):
        assert analytic_transfers(Method.DENSE, 4096, 128) == 1_048_832

    def test_sparq(self):
        assert analytic_transfers(Method.SPARQ, 4096, 128, r=32, k=128) == 164_352

    def test_sparq_without_reallocation(self):
        assert analytic_transfers(Method.SPARQ, 4096, 128, r=32, k=128, reallocate_mean=False) == 164_352 - 256

    @pytest.mark.parametrize(
        "method, expected",
        [
            (Method.H2O, 2 * 64 * 16 + 2 * 16 + 2 * 100),
            (Method.LM_INF, 2 * 64 * 16 + 2 * 16),
            (Method.FLEXGEN, 100 * 16 + 64 * 16 + 2 * 16),
        ],
    )
    def test_baselines(self, method, expected):
        assert analytic_transfers(method, 100, 16, k=64) == expected

    def test_budget_and_rank_are_clamped(self):
        assert analytic_transfers(Method.SPARQ, 10, 8, r=50, k=50) == analytic_transfers(Method.SPARQ, 10, 8, r=8, k=10)

    @pytest.mark.parametrize("method", [Method.SPARQ, Method.H2O, Method.LM_INF, Method.FLEXGEN])
    def test_missing_budget(self, method):
        with pytest.raises(MissingParameterError, match="missing-parameter"):
            analytic_transfers(method, 100, 16, r=8)

    def test_missing_rank(self):
        with pytest.raises(MissingParameterError):
            analytic_transfers(Method.SPARQ, 100, 16, k=8)

    def test_breakdown_sums_to_total(self):
        breakdown = analytic_breakdown(Method.SPARQ, 4096, 128, r=32, k=128)
        assert breakdown[TransferCategory.K_ROWS] == 4096 * 32
        assert sum(breakdown.values()) == 164_352


class TestRatios:
    def test_short_context_speedup(self):
        assert abs(theoretical_speedup(Method.SPARQ, 4096, 128, r=32, k=128) - 6.38) < 0.01

    def test_long_context_speedup(self):
        assert abs(theoretical_speedup(Method.SPARQ, 16384, 128, r=32, k=128) - 7.52) < 0.02

    def test_sparq_ratio_monotone_in_rank_and_budget(self):
        ratios_r = [compression_ratio(Method.SPARQ, 2048, 128, r=r, k=64) for r in (8, 16, 32, 64, 128)]
        ratios_k = [compression_ratio(Method.SPARQ, 2048, 128, r=16, k=k) for k in (16, 32, 64, 128, 256)]
        assert ratios_r == sorted(ratios_r)
        assert ratios_k == sorted(ratios_k)

    def test_sparq_ratio_limit(self):
        assert abs(compression_ratio(Method.SPARQ, 10**9, 128, r=32, k=128) - 32 / 256) < 1e-6

    def test_lm_infinite_never_exceeds_h2o(self):
        for S in range(1, 300, 7):
            lm_inf = analytic_transfers(Method.LM_INF, S, 32, k=64)
            assert lm_inf <= analytic_transfers(Method.H2O, S, 32, k=64)

    def test_cost_rows_use_closed_form_ratios(self):
        rows = cost_rows(list(Method), [512, 4096], 64, ranks=[8, 32], topks=[64], reallocate_mean=False)
        assert len(rows) == 2 * (1 + 2 + 3)
        for row in rows:
            params = {"r": row.r, "k": row.k, "reallocate_mean": False}
            assert row.compression_ratio == compression_ratio(row.method, row.S, row.d_h, **params)
            assert row.theoretical_speedup == theoretical_speedup(row.method, row.S, row.d_h, **params)
            assert row.compression_ratio == pytest.approx(row.transfers / row.dense_transfers, rel=1e-12)

    def test_bytes_view(self):
        assert bytes_view(1000, 2) == 2000
        with pytest.raises(InvalidParameterError):
            bytes_view(1000, 0)


class TestRoofline:
    @pytest.mark.parametrize(
        "g, d_m, S, expected",
        [(1, 4096, 4096, 7), (8, 8192, 4096, 104), (8, 8192, 16384, 32)],
    )
    def test_max_intensity(self, g, d_m, S, expected):
        assert max_intensity(ModelShape(d_m=d_m, S=S, g=g)) == expected

    def test_rho(self):
        assert ModelShape(d_m=8192, S=4096, g=8).rho == 1 / 16

    def test_attention_fraction(self):
        assert abs(attention_transfer_fraction(ModelShape(d_m=4096, S=4096)) - 1 / 7) < 1e-12
        assert abs(attention_transfer_fraction(ModelShape(d_m=4096, S=4096, B=1e9)) - 1.0) < 1e-6
        # rho = 6/B
        assert attention_transfer_fraction(ModelShape(d_m=4096, S=4096, B=6)) == 0.5

    def test_attention_fraction_monotone(self):
        by_seq = [attention_transfer_fraction(ModelShape(d_m=1024, S=S)) for S in (128, 512, 2048, 8192)]
        by_batch = [attention_transfer_fraction(ModelShape(d_m=1024, S=1024, B=B)) for B in (1, 2, 8, 64)]
        assert by_seq == sorted(by_seq)
        assert by_batch == sorted(by_batch)

    def test_intensity_approaches_limit_from_below(self):
        shape = ModelShape(d_m=8192, S=4096, g=8)
        values = [arithmetic_intensity(ModelShape(d_m=8192, S=4096, g=8, B=B)) for B in (1, 4, 16, 256, 1e7)]
        assert values == sorted(values)
        assert abs(values[-1] - max_intensity(shape)) < 1e-2

    def test_general_form_matches_rho_form(self):
        shape = ModelShape(d_m=2048, S=3000, g=4, B=3)
        rho = shape.rho
        assert abs(arithmetic_intensity(shape) - (6 + rho * 4) / (6 / 3 + rho)) < 1e-12

    def test_h100_is_bandwidth_bound(self):
        report = bandwidth_bound(ModelShape(d_m=8192, S=4096, g=8, B=1e6), HardwareSpec.preset("h100"))
        assert round(report.machine_balance) == 296
        assert report.is_bandwidth_bound

    def test_equal_balance_is_not_bandwidth_bound(self):
        report = bound_for_counts(10.0, 5.0, HardwareSpec(name="x", r_A=2.0, r_M=1.0))
        assert report.intensity == report.machine_balance
        assert not report.is_bandwidth_bound

    def test_time_lower_bound(self):
        assert bound_for_counts(1.0, 1.0, HardwareSpec(name="unit", r_A=1.0, r_M=1.0)).time_lower_bound_s == 1.0

    def test_unknown_preset(self):
        with pytest.raises(InvalidParameterError):
            HardwareSpec.preset("abacus")


class TestReconcile:
    def test_dense_call(self, rng):
        cache = KVCacheHead.from_arrays(rng.standard_normal((8, 4)), rng.standard_normal((8, 4)))
        report = reconcile(dense_attention(rng.standard_normal(4), cache).ledger_delta, 72)
        assert report.counted == report.analytic == 72

    def test_sparq_call_excludes_dual_layout_write(self, rng):
        cache = KVCacheHead.from_arrays(rng.standard_normal((8, 4)), rng.standard_normal((8, 4)))
        output = sparq_attention(rng.standard_normal(4), cache, AttentionHeadConfig(d_h=4, r=2, k=4))
        report = reconcile(output.ledger_delta, 64)
        assert report.counted == 64
        assert report.excluded == {"dual_layout": 4}

    def test_divergence_names_category(self):
        ledger = TransferLedger()
        ledger.charge_read(TransferCategory.K_COLUMNS, 32)
        ledger.charge_read(TransferCategory.V, 33)
        ledger.charge_write(TransferCategory.KV_APPEND, 8)
        with pytest.raises(LedgerDivergenceError, match="ledger-analytic-divergence") as excinfo:
            reconcile(ledger, analytic_breakdown(Method.DENSE, 8, 4))
        assert excinfo.value.diff == {"v": 1}
        assert "v: +1" in str(excinfo.value)

    def test_total_divergence(self):
        ledger = TransferLedger()
        ledger.charge_read(TransferCategory.V, 10)
        with pytest.raises(LedgerDivergenceError) as excinfo:
            reconcile(ledger, 9)
        assert excinfo.value.diff == {"total": 1}

    @pytest.mark.parametrize("method", list(Method))
    def test_counted_equals_closed_form(self, rng, method):

        for trial in range(1000):
            S = int(rng.integers(1, 24))
            d_h = int(rng.integers(1, 8))
            cfg = AttentionHeadConfig(
                d_h=d_h,
                r=int(rng.integers(1, d_h + 1)),
                k=int(rng.integers(1, S + 1)),
                reallocate_mean=bool(rng.integers(0, 2)),
            )
            workload = synth_workload(S, d_h, seed=trial)
            run = run_method(method, workload, workload.cache(), cfg)
            assert run.ledger.reconciled_total == analytic_transfers(
                method, S, d_h, r=cfg.r, k=cfg.k, reallocate_mean=cfg.use_mean_reallocation
            )
        assert np.isfinite(run.outputs[0].y).all()
