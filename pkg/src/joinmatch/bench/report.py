"""Benchmark configuration and CSV/JSON report emission."""

from __future__ import annotations

import csv
import json
import statistics
from dataclasses import dataclass, field
from pathlib import Path

ROW_COLUMNS = (
    "benchmark",
    "matcher",
    "parameter",
    "repetition",
    "elapsed_ms",
    "matches",
    "throughput_mps",
)
SUMMARY_COLUMNS = (
    "benchmark",
    "matcher",
    "parameter",
    "mean_throughput_mps",
    "stddev_throughput_mps",
)


@dataclass
class BenchConfig:
    """One harness invocation; a fixed seed fixes the message sequences."""

    benchmark: str
    matcher: str = "all"
    size: int = 3
    workload: str = "clean"
    noise: int | None = None
    matches: int = 10
    reps: int = 5
    warmup: int = 5
    seed: int = 42
    workers: int | None = None
    timeout_s: float = 300.0
    fmt: str = "csv"
    out: str | None = None
    # bounded-buffer shape
    buffer_size: int = 1000
    producers: int = 10
    consumers: int = 10
    items: int = 5
    # micro benchmark shape
    kind: str = "ping-pong"
    mode: str = "both"


@dataclass(frozen=True)
class BenchRow:
    benchmark: str
    matcher: str
    parameter: int
    repetition: int
    elapsed_ms: float
    matches: int
    throughput_mps: float


@dataclass(frozen=True)
class SummaryRow:
    benchmark: str
    matcher: str
    parameter: int
    mean_throughput_mps: float
    stddev_throughput_mps: float


@dataclass
class BenchReport:
    rows: list[BenchRow] = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    timeouts: list[BenchRow] = field(default_factory=list)

    def extend(self, other: "BenchReport") -> None:
        self.rows.extend(other.rows)
        self.timeouts.extend(other.timeouts)
        self.meta.update(other.meta)

    def summary(self) -> list[SummaryRow]:
        """Mean and sample standard deviation per (benchmark, matcher, parameter)."""
        grouped: dict[tuple[str, str, int], list[float]] = {}
        order: list[tuple[str, str, int]] = []
        for row in self.rows:
            group = (row.benchmark, row.matcher, row.parameter)
            if group not in grouped:
                grouped[group] = []
                order.append(group)
            grouped[group].append(row.throughput_mps)
        out = []
        for group in order:
            values = grouped[group]
            mean = statistics.fmean(values)
            stddev = statistics.stdev(values) if len(values) > 1 else 0.0
            out.append(SummaryRow(*group, mean, stddev))
        return out

    def mean_throughput(self, matcher: str, parameter: int | None = None) -> float:
        values = [
            r.throughput_mps
            for r in self.rows
            if r.matcher == matcher and (parameter is None or r.parameter == parameter)
        ]
        if not values:
            raise ValueError(f"no rows for matcher {matcher!r}")
        return statistics.fmean(values)


def _row_cells(row: BenchRow) -> list[str]:
    return [
        row.benchmark,
        row.matcher,
        str(row.parameter),
        str(row.repetition),
        repr(row.elapsed_ms),
        str(row.matches),
        repr(row.throughput_mps),
    ]


def _summary_path(path: Path) -> Path:
    return path.with_suffix(".summary.csv")


def emit_report(report: BenchReport, fmt: str, path: str | Path) -> list[Path]:
    """Write the report; CSV gets a companion summary file, JSON embeds it.

    Returns the files written.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    if fmt == "csv":
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(ROW_COLUMNS)
            for row in report.rows:
                writer.writerow(_row_cells(row))
        written.append(path)
        summary_path = _summary_path(path)
        write_summary_csv(report.summary(), summary_path)
        written.append(summary_path)
        if report.meta:
            meta_path = path.with_suffix(".meta.json")
            meta_path.write_text(json.dumps(report.meta, indent=2, default=str) + "\n")
            written.append(meta_path)
    elif fmt == "json":
        payload = {
            "rows": [dict(zip(ROW_COLUMNS, _row_cells(r))) for r in report.rows],
            "summary": [
                {
                    "benchmark": s.benchmark,
                    "matcher": s.matcher,
                    "parameter": str(s.parameter),
                    "mean_throughput_mps": repr(s.mean_throughput_mps),
                    "stddev_throughput_mps": repr(s.stddev_throughput_mps),
                }
                for s in report.summary()
            ],
            "meta": report.meta,
        }
        path.write_text(json.dumps(payload, indent=2, default=str) + "\n")
        written.append(path)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    return written


def write_summary_csv(summary: list[SummaryRow], path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_COLUMNS)
        for s in summary:
            writer.writerow(
                [
                    s.benchmark,
                    s.matcher,
                    str(s.parameter),
                    repr(s.mean_throughput_mps),
                    repr(s.stddev_throughput_mps),
                ]
            )
    return path


def load_rows_csv(path: str | Path) -> list[BenchRow]:
    rows = []
    with Path(path).open(newline="") as fh:
        for record in csv.DictReader(fh):
            rows.append(
                BenchRow(
                    record["benchmark"],
                    record["matcher"],
                    int(record["parameter"]),
                    int(record["repetition"]),
                    float(record["elapsed_ms"]),
                    int(record["matches"]),
                    float(record["throughput_mps"]),
                )
            )
    return rows


def load_rows_json(path: str | Path) -> list[BenchRow]:
    payload = json.loads(Path(path).read_text())
    return [
        BenchRow(
            r["benchmark"],
            r["matcher"],
            int(r["parameter"]),
            int(r["repetition"]),
            float(r["elapsed_ms"]),
            int(r["matches"]),
            float(r["throughput_mps"]),
        )
        for r in payload["rows"]
    ]
