"""Timed benchmark runners: spawn an actor per repetition and measure fires.

Timing starts with the sending of the first message and stops when the actor
reaches its fire target. Every repetition gets a fresh actor, matcher, and
mailbox; warmup repetitions run the same logic untimed.
"""

from __future__ import annotations

import time
from collections.abc import Callable, Sequence

from ..core import JoinPattern, Message
from ..kernel import FACTORY_IDENTIFIERS, MatcherFactory, matcher_factory
from ..runtime import Actor
from .boundedbuffer import run_bounded_buffer_once
from .micro import run_chameneos, run_ping_pong
from .report import BenchConfig, BenchReport, BenchRow
from .smarthouse import NOISE_LEVELS, gen_smart_house_traffic, smart_house_patterns
from .synthetic import gen_synthetic_traffic, synthetic_patterns

SMART_HOUSE_SPARE_GROUPS = 2


def _selected_matchers(config: BenchConfig) -> list[str]:
    if config.matcher == "all":
        return list(FACTORY_IDENTIFIERS)
    if config.matcher not in FACTORY_IDENTIFIERS:
        raise ValueError(f"unknown matcher {config.matcher!r}")
    return [config.matcher]


def _timed_actor_run(
    build_patterns: Callable[[], tuple[list[JoinPattern], list]],
    factory: MatcherFactory,
    messages: Sequence[Message],
    timeout_s: float,
) -> tuple[float, int, bool]:
    """One repetition: returns (elapsed seconds, fires completed, timed out)."""
    patterns, fire_log = build_patterns()
    actor = Actor(patterns, factory)
    handle, ref = actor.start()
    started = time.perf_counter()
    for message in messages:
        ref.send(message)
    try:
        completed = handle.result(timeout=timeout_s)
        elapsed = (handle.completed_at or time.perf_counter()) - started
        return max(elapsed, 1e-9), int(completed), False
    except TimeoutError:
        actor.stop_now()
        return timeout_s, len(fire_log), True


def _repetition_rows(
    report: BenchReport,
    benchmark: str,
    matcher: str,
    parameter: int,
    config: BenchConfig,
    run_once: Callable[[], tuple[float, int, bool]],
) -> None:
    for _ in range(config.warmup):
        run_once()
    for rep in range(config.reps):
        elapsed, completed, timed_out = run_once()
        row = BenchRow(
            benchmark,
            matcher,
            parameter,
            rep,
            elapsed * 1000.0,
            completed,
            completed / elapsed if elapsed > 0 else 0.0,
        )
        report.rows.append(row)
        if timed_out:
            report.timeouts.append(row)


def run_synthetic(config: BenchConfig, *, guarded: bool = False) -> BenchReport:
    """Single-pattern benchmark; the parameter axis is the pattern size."""
    guarded = guarded or config.workload == "noise-payload"
    benchmark = f"synthetic-{'guarded' if guarded else 'guardless'}-{config.workload}"
    report = BenchReport(
        meta={
            "benchmark": benchmark,
            "seed": config.seed,
            "matches": config.matches,
            "noise_per_group": config.noise if config.noise is not None else 20,
            "noise_interleaving": "shuffled-within-group",
        }
    )
    noise_kw = {}
    if config.noise is not None:
        noise_kw["noise_per_group"] = config.noise
    messages = gen_synthetic_traffic(
        config.size, config.workload, config.matches, config.seed, **noise_kw
    )
    for matcher_id in _selected_matchers(config):
        factory = matcher_factory(matcher_id, workers=config.workers)

        def build():
            log: list = []
            patterns = synthetic_patterns(
                config.size, guarded, fire_target=config.matches, fire_log=log
            )
            return patterns, log

        _repetition_rows(
            report,
            benchmark,
            matcher_id,
            config.size,
            config,
            lambda: _timed_actor_run(build, factory, messages, config.timeout_s),
        )
    return report


def run_smart_house(config: BenchConfig) -> BenchReport:
    """Overlapping-pattern benchmark; the parameter axis is noise per match."""
    levels = NOISE_LEVELS if config.noise is None else (config.noise,)
    report = BenchReport(
        meta={
            "benchmark": "smart-house",
            "seed": config.seed,
            "matches": config.matches,
            "noise_levels": list(levels),
            "noise_interleaving": "shuffled-within-group",
        }
    )
    for noise in levels:
        messages = gen_smart_house_traffic(
            config.matches + SMART_HOUSE_SPARE_GROUPS, noise, config.seed
        )
        for matcher_id in _selected_matchers(config):
            factory = matcher_factory(matcher_id, workers=config.workers)

            def build():
                log: list = []
                patterns = smart_house_patterns(fire_target=config.matches, fire_log=log)
                return patterns, log

            _repetition_rows(
                report,
                "smart-house",
                matcher_id,
                noise,
                config,
                lambda: _timed_actor_run(build, factory, messages, config.timeout_s),
            )
    return report


def run_bounded_buffer(config: BenchConfig) -> BenchReport:
    """Producer/consumer benchmark; the parameter axis is the producer count."""
    report = BenchReport(
        meta={
            "benchmark": "bounded-buffer",
            "buffer_size": config.buffer_size,
            "producers": config.producers,
            "consumers": config.consumers,
            "items_per_producer": config.items,
        }
    )
    for matcher_id in _selected_matchers(config):
        factory = matcher_factory(matcher_id, workers=config.workers)

        def run_once():
            outcome = run_bounded_buffer_once(
                config.buffer_size,
                config.producers,
                config.consumers,
                config.items,
                factory,
                timeout_s=config.timeout_s,
            )
            if outcome.stats.max_items > config.buffer_size:
                raise AssertionError(
                    f"capacity violated: {outcome.stats.max_items} items in a "
                    f"buffer of {config.buffer_size}"
                )
            return max(outcome.elapsed_s, 1e-9), outcome.delivered, outcome.timed_out

        _repetition_rows(
            report, "bounded-buffer", matcher_id, config.producers, config, run_once
        )
    return report


def run_micro(config: BenchConfig) -> BenchReport:
    """Ping-pong / chameneos; the baseline mode appears as matcher 'simple-actor'."""
    benchmark = f"micro-{config.kind}"
    report = BenchReport(
        meta={"benchmark": benchmark, "kind": config.kind, "n": config.matches}
    )
    modes = ("simple-actor", "join-actor") if config.mode == "both" else (config.mode,)
    runner = run_ping_pong if config.kind == "ping-pong" else run_chameneos

    if "simple-actor" in modes:
        def run_simple():
            outcome = runner(config.matches, "simple-actor", timeout_s=config.timeout_s)
            return max(outcome.elapsed_s, 1e-9), outcome.completed, outcome.timed_out

        _repetition_rows(
            report, benchmark, "simple-actor", config.matches, config, run_simple
        )
    if "join-actor" in modes:
        for matcher_id in _selected_matchers(config):
            factory = matcher_factory(matcher_id, workers=config.workers)

            def run_join():
                outcome = runner(
                    config.matches, "join-actor", factory, timeout_s=config.timeout_s
                )
                return max(outcome.elapsed_s, 1e-9), outcome.completed, outcome.timed_out

            _repetition_rows(
                report, benchmark, matcher_id, config.matches, config, run_join
            )
    return report


def run_benchmark(config: BenchConfig) -> BenchReport:
    """Dispatch a configuration to its benchmark family."""
    if config.benchmark.startswith("synthetic"):
        return run_synthetic(config, guarded=config.benchmark == "synthetic-guarded")
    if config.benchmark == "smart-house":
        return run_smart_house(config)
    if config.benchmark == "bounded-buffer":
        return run_bounded_buffer(config)
    if config.benchmark == "micro":
        return run_micro(config)
    raise ValueError(f"unknown benchmark {config.benchmark!r}")
