import argparse
import sys
from collections.abc import Sequence

from pydantic import ValidationError

from sparq_bench.constants import DEFAULT_HEAD_DIM, DEFAULT_RANKS, DEFAULT_SEED, DEFAULT_TOPK, DEFAULT_TRIALS
from sparq_bench.dal.local_disk import (
    ReportLocalDiskDataAccess,
    ReportStreamDataAccess,
    TraceLocalDiskDataAccess,
)
from sparq_bench.errors import LedgerDivergenceError, SparqError
from sparq_bench.harness.agreement import run_agreement
from sparq_bench.harness.cost import cost_rows, roofline_rows
from sparq_bench.harness.report import ReportFormat, render
from sparq_bench.harness.sweep import run_sweep
from sparq_bench.harness.trace_eval import trace_eval, trace_sweep_spec, workload_from_trace, workload_to_trace
from sparq_bench.harness.workload import synth_workload
from sparq_bench.logger import logger
from sparq_bench.models.config import TemperatureRule
from sparq_bench.models.costmodel import CostRow, HardwareSpec, Method, RooflineRow
from sparq_bench.models.sweep import AgreementRow, AgreementSpec, ComponentStrategy, ReportRow, SweepSpec, TailKind
from sparq_bench.models.trace import TraceDType

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_LEDGER_DIVERGENCE = 3

_DTYPES = {"f32": TraceDType.F32, "f64": TraceDType.F64}


def _local_window(value: str) -> int | str:
    if value == "k/4":
        return value
    try:
        return int(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected an integer or 'k/4', got {value!r}") from exc


def _emit(report: str, out: str | None):
    if out:
        ReportLocalDiskDataAccess().store_report(report, out)
        logger.info("Report written", extra={"path": out})
    else:
        ReportStreamDataAccess(sys.stdout).store_report(report, "stdout")


def _add_output_args(parser: argparse.ArgumentParser):
    parser.add_argument(
        "--format",
        type=ReportFormat,
        default=ReportFormat.CSV,
        choices=list(ReportFormat),
        help="Report format (default: csv)",
    )
    parser.add_argument("--out", type=str, default=None, help="Write the report to this file instead of stdout")


def _add_method_args(parser: argparse.ArgumentParser, seq_lens: list[int]):
    parser.add_argument(
        "--method",
        type=Method,
        nargs="+",
        default=list(Method),
        choices=list(Method),
        help="Methods to evaluate (default: all)",
    )
    parser.add_argument("--seq-len", type=int, nargs="+", default=seq_lens, help="Sequence lengths S")
    parser.add_argument("--head-dim", type=int, default=DEFAULT_HEAD_DIM, help="Head dimension d_h")
    parser.add_argument("--gqa", type=int, default=1, help="Query heads per KV head g")
    parser.add_argument("--rank", type=int, nargs="+", default=DEFAULT_RANKS, help="SparQ ranks r")
    parser.add_argument("--topk", type=int, nargs="+", default=DEFAULT_TOPK, help="Budgets k")
    parser.add_argument("--local", type=_local_window, default="k/4", help="Local window l, an integer or k/4")
    parser.add_argument("--no-realloc", action="store_true", help="Disable mean value reallocation")


def _add_sampling_args(parser: argparse.ArgumentParser, trials: int):
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED, help="Random seed")
    parser.add_argument("--trials", type=int, default=trials, help="Random trials per cell")
    parser.add_argument(
        "--tail", type=TailKind, default=TailKind.HEAVY, choices=list(TailKind), help="Query distribution"
    )
    parser.add_argument(
        "--temperature",
        type=TemperatureRule,
        default=TemperatureRule.L1_COVERAGE,
        choices=list(TemperatureRule),
        help="Softmax temperature rule for the approximate scores",
    )


def _sweep_spec(args: argparse.Namespace, seq_lens: list[int]) -> SweepSpec:
    return SweepSpec(
        methods=args.method,
        seq_lens=seq_lens,
        d_h=args.head_dim,
        g=args.gqa,
        ranks=args.rank,
        topks=args.topk,
        local=args.local,
        trials=args.trials,
        seed=args.seed,
        tail=args.tail,
        reallocate_mean=False if args.no_realloc else None,
        temperature_rule=args.temperature,
    )


def run_bench(args: argparse.Namespace):
    spec = _sweep_spec(args, args.seq_len)
    rows = run_sweep(spec)
    _emit(render(rows, ReportRow, args.format, spec_hash=spec.spec_hash()), args.out)


def run_cost(args: argparse.Namespace):
    if args.roofline:
        hw = HardwareSpec.preset(args.hardware)
        configs = None
        if args.model_dim:
            configs = [(args.gqa, d_m, S) for d_m in args.model_dim for S in args.seq_len]
        rows = roofline_rows(hw, configs=configs, batch=args.batch)
        _emit(render(rows, RooflineRow, args.format), args.out)
        return
    rows = cost_rows(
        methods=args.method,
        seq_lens=args.seq_len,
        d_h=args.head_dim,
        ranks=args.rank,
        topks=args.topk,
        reallocate_mean=not args.no_realloc,
        element_width=args.element_bytes,
    )
    _emit(render(rows, CostRow, args.format), args.out)


def run_agreement_cmd(args: argparse.Namespace):
    workloads = None
    if args.trace:
        workload = workload_from_trace(TraceLocalDiskDataAccess().get_trace(args.trace))
        workloads = [workload]
        seq_len, d_h, g = workload.S, workload.d_h, workload.g
    else:
        seq_len, d_h, g = args.seq_len, args.head_dim, args.gqa
    spec = AgreementSpec(
        seq_len=seq_len,
        d_h=d_h,
        g=g,
        ranks=args.rank,
        k=args.topk,
        trials=args.trials,
        seed=args.seed,
        tail=args.tail,
        strategies=args.strategy,
        temperature_rule=args.temperature,
    )
    rows = run_agreement(spec, workloads=workloads)
    _emit(render(rows, AgreementRow, args.format), args.out)


def run_trace_eval(args: argparse.Namespace):
    trace = TraceLocalDiskDataAccess().get_trace(args.trace)
    spec = trace_sweep_spec(workload_from_trace(trace), _sweep_spec(args, [1]))
    rows = trace_eval(trace, spec)
    _emit(render(rows, ReportRow, args.format, spec_hash=spec.spec_hash()), args.out)


def run_gen_trace(args: argparse.Namespace):
    workload = synth_workload(args.seq_len, args.head_dim, args.gqa, args.tail, seed=args.seed)
    path = TraceLocalDiskDataAccess().store_trace(workload_to_trace(workload, _DTYPES[args.dtype]), args.out)
    logger.info("Trace written", extra={"path": path, "S": args.seq_len, "d_h": args.head_dim, "g": args.gqa})


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="SparQ Attention transfer and quality benchmarks")
    parser.add_argument(
        "--log-level",
        type=str,
        default=None,
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging level (default: POWERTOOLS_LOG_LEVEL or INFO)",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    bench = subparsers.add_parser("bench", help="Sweep methods over synthetic workloads")
    _add_method_args(bench, seq_lens=[1024])
    _add_sampling_args(bench, trials=DEFAULT_TRIALS)
    _add_output_args(bench)
    bench.set_defaults(handler=run_bench)

    cost = subparsers.add_parser("cost", help="Closed-form transfer and roofline tables")
    _add_method_args(cost, seq_lens=[4096, 16384])
    cost.add_argument("--element-bytes", type=int, default=2, help="Bytes per element for the byte view")
    cost.add_argument("--roofline", action="store_true", help="Print the arithmetic-intensity table instead")
    cost.add_argument("--hardware", type=str, default="h100", help="Hardware preset: bow-ipu, a10 or h100")
    cost.add_argument("--model-dim", type=int, nargs="+", default=None, help="Model dimensions d_m for --roofline")
    cost.add_argument("--batch", type=float, default=1, help="Batch size B for --roofline")
    _add_output_args(cost)
    cost.set_defaults(handler=run_cost)

    agreement = subparsers.add_parser("agreement", help="Top-k agreement of the approximate scores")
    agreement.add_argument("--seq-len", type=int, default=512, help="Sequence length S")
    agreement.add_argument("--head-dim", type=int, default=64, help="Head dimension d_h")
    agreement.add_argument("--gqa", type=int, default=1, help="Query heads per KV head g")
    agreement.add_argument("--rank", type=int, nargs="+", default=[8, 16, 32, 64], help="Ranks r")
    agreement.add_argument("--topk", type=int, default=32, help="Budget k")
    agreement.add_argument(
        "--strategy",
        type=ComponentStrategy,
        nargs="+",
        default=[ComponentStrategy.TOP_MAGNITUDE, ComponentStrategy.RANDOM],
        choices=list(ComponentStrategy),
        help="Component selection strategies",
    )
    agreement.add_argument("--trace", type=str, default=None, help="Measure over a trace file instead")
    _add_sampling_args(agreement, trials=200)
    _add_output_args(agreement)
    agreement.set_defaults(handler=run_agreement_cmd)

    trace = subparsers.add_parser("trace-eval", help="Evaluate methods over a trace file")
    trace.add_argument("--trace", type=str, required=True, help="Trace file path")
    _add_method_args(trace, seq_lens=[1])
    _add_sampling_args(trace, trials=1)
    _add_output_args(trace)
    trace.set_defaults(handler=run_trace_eval)

    gen = subparsers.add_parser("gen-trace", help="Write a synthetic workload as a trace file")
    gen.add_argument("--seq-len", type=int, default=1024, help="Sequence length S")
    gen.add_argument("--head-dim", type=int, default=DEFAULT_HEAD_DIM, help="Head dimension d_h")
    gen.add_argument("--gqa", type=int, default=1, help="Query heads per KV head g")
    gen.add_argument("--tail", type=TailKind, default=TailKind.HEAVY, choices=list(TailKind), help="Query distribution")
    gen.add_argument("--seed", type=int, default=DEFAULT_SEED, help="Random seed")
    gen.add_argument("--dtype", type=str, default="f32", choices=sorted(_DTYPES), help="Stored element type")
    gen.add_argument("--out", type=str, required=True, help="Trace file path")
    gen.set_defaults(handler=run_gen_trace)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.log_level:
        logger.setLevel(args.log_level)

    try:
        args.handler(args)
    except LedgerDivergenceError as e:
        logger.error("Ledger divergence", extra={"command": args.command, "error": str(e)})
        return EXIT_LEDGER_DIVERGENCE
    except (SparqError, ValidationError) as e:
        logger.error("Invalid input", extra={"command": args.command, "error": str(e)})
        return EXIT_VALIDATION
    except OSError as e:
        logger.error("Cannot access file", extra={"command": args.command, "error": str(e)})
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
