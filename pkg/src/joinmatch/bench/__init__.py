"""Benchmark harness: workload generators, timed runners, and reports."""

from .report import BenchConfig, BenchReport, BenchRow, SummaryRow, emit_report
from .runner import (
    run_benchmark,
    run_bounded_buffer,
    run_micro,
    run_smart_house,
    run_synthetic,
)
from .synthetic import gen_synthetic_traffic, synthetic_patterns
from .smarthouse import gen_smart_house_traffic, smart_house_patterns
