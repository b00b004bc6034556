"""Command line interface for the benchmark harness.

Exit codes: 0 on success, 2 on assertion or differential failure, 3 when any
repetition timed out.
"""

from __future__ import annotations

import argparse
import sys

from ..kernel import FACTORY_IDENTIFIERS
from .randomtraces import run_differential_suite
from .report import BenchConfig, emit_report
from .runner import run_benchmark
from .synthetic import WORKLOADS

BENCHMARKS = ("synthetic", "synthetic-guarded", "smart-house", "bounded-buffer", "micro", "differential")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="joinmatch-bench",
        description="Join-pattern matching benchmark harness",
    )
    parser.add_argument("benchmark", choices=BENCHMARKS)
    parser.add_argument(
        "--matcher",
        default="all",
        choices=(*FACTORY_IDENTIFIERS, "all"),
        help="matching engine to measure (default: all)",
    )
    parser.add_argument("--size", type=int, default=3, help="pattern size 1..5 (synthetic)")
    parser.add_argument("--workload", default="clean", choices=WORKLOADS)
    parser.add_argument("--noise", type=int, default=None, help="noise messages per match group")
    parser.add_argument("--matches", type=int, default=10, help="fires per repetition")
    parser.add_argument("--reps", type=int, default=5)
    parser.add_argument("--warmup", type=int, default=5)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--workers", type=int, default=None, help="parallel engine workers")
    parser.add_argument("--format", dest="fmt", default="csv", choices=("csv", "json"))
    parser.add_argument("--out", default=None, help="report path")
    parser.add_argument("--timeout-s", type=float, default=300.0)
    parser.add_argument("--buffer-size", type=int, default=1000)
    parser.add_argument("--producers", type=int, default=10)
    parser.add_argument("--consumers", type=int, default=10)
    parser.add_argument("--items", type=int, default=5, help="items per producer")
    parser.add_argument("--kind", default="ping-pong", choices=("ping-pong", "chameneos"))
    parser.add_argument(
        "--mode", default="both", choices=("simple-actor", "join-actor", "both")
    )
    parser.add_argument("--traces", type=int, default=1000, help="differential trace count")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)

    if args.benchmark == "differential":
        outcome = run_differential_suite(args.traces, args.seed, workers=args.workers or 2)
        print(
            f"differential: {outcome.traces_run} traces, {outcome.total_fires} fires, "
            f"{len(outcome.divergences)} divergences"
        )
        for d in outcome.divergences:
            print(f"  seed {d.seed}: {d.engine} diverged from oracle", file=sys.stderr)
        return 0 if outcome.ok else 2

    config = BenchConfig(
        benchmark=args.benchmark,
        matcher=args.matcher,
        size=args.size,
        workload=args.workload,
        noise=args.noise,
        matches=args.matches,
        reps=args.reps,
        warmup=args.warmup,
        seed=args.seed,
        workers=args.workers,
        timeout_s=args.timeout_s,
        fmt=args.fmt,
        out=args.out,
        buffer_size=args.buffer_size,
        producers=args.producers,
        consumers=args.consumers,
        items=args.items,
        kind=args.kind,
        mode=args.mode,
    )
    try:
        report = run_benchmark(config)
    except AssertionError as failure:
        print(f"benchmark assertion failed: {failure}", file=sys.stderr)
        return 2

    for summary in report.summary():
        print(
            f"{summary.benchmark} {summary.matcher} parameter={summary.parameter} "
            f"mean={summary.mean_throughput_mps:.1f} mps "
            f"stddev={summary.stddev_throughput_mps:.1f}"
        )
    if args.out:
        written = emit_report(report, args.fmt, args.out)
        for path in written:
            print(f"wrote {path}")
    if report.timeouts:
        print(f"{len(report.timeouts)} repetition(s) timed out", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
