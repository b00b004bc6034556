"""Seeded random scenarios for differential testing of the matching engines.

Each scenario draws a handful of join patterns (small sizes, possibly repeated
tags, randomized pure guards over small integer payloads) and a message trace
mixing matchable and unmatchable tags. Every engine's fire sequence must equal
the oracle's on every scenario.
"""

from __future__ import annotations

import random
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

from ..core import JoinPattern, LookupEnv, Message, build_pattern, slot
from ..kernel import MatcherFactory, all_factories
from ..oracle import Fire, differential_replay

SCENARIO_TAGS = ("A", "B", "C", "D")
UNMATCHED_TAG = "Z"
MAX_TRACE = 30
MAX_PATTERNS = 3
MAX_SIZE = 4
PAYLOAD_RANGE = 4


def _guard_true(_names: tuple[str, ...]) -> Callable[[LookupEnv], bool]:
    return lambda env: True


def _guard_all_equal(names: tuple[str, ...]) -> Callable[[LookupEnv], bool]:
    def guard(env: LookupEnv) -> bool:
        values = [env[n] for n in names]
        return all(v == values[0] for v in values)

    return guard


def _guard_sum_mod(names: tuple[str, ...], modulus: int, residue: int):
    def guard(env: LookupEnv) -> bool:
        return sum(env[n] for n in names) % modulus == residue

    return guard


def _guard_spread(names: tuple[str, ...], limit: int):
    def guard(env: LookupEnv) -> bool:
        values = [env[n] for n in names]
        return max(values) - min(values) <= limit

    return guard


def _guard_first_even(names: tuple[str, ...]):
    return lambda env: env[names[0]] % 2 == 0


def _guard_ascending(names: tuple[str, ...]):
    def guard(env: LookupEnv) -> bool:
        values = [env[n] for n in names]
        return all(a <= b for a, b in zip(values, values[1:]))

    return guard


def _random_guard(rng: random.Random, names: tuple[str, ...]):
    roll = rng.random()
    if roll < 0.30:
        return _guard_true(names)
    if roll < 0.45:
        return _guard_all_equal(names)
    if roll < 0.65:
        return _guard_sum_mod(names, rng.randint(2, 3), rng.randrange(2))
    if roll < 0.80:
        return _guard_spread(names, rng.randint(0, 2))
    if roll < 0.90:
        return _guard_first_even(names)
    return _guard_ascending(names)


@dataclass
class Scenario:
    seed: int
    patterns: list[JoinPattern]
    trace: list[Message]


def gen_random_scenario(seed: int) -> Scenario:
    rng = random.Random(seed)
    pattern_count = rng.randint(1, MAX_PATTERNS)
    patterns = []
    serial = 0
    for _ in range(pattern_count):
        size = rng.choices(range(1, MAX_SIZE + 1), weights=(3, 4, 3, 2))[0]
        tags = []
        for _ in range(size):
            # Occasionally repeat a tag already used in this pattern.
            if tags and rng.random() < 0.25:
                tags.append(rng.choice(tags))
            else:
                tags.append(rng.choice(SCENARIO_TAGS))
        names = tuple(f"v{serial + i}" for i in range(size))
        serial += size
        slots = [slot(tag, name) for tag, name in zip(tags, names)]
        patterns.append(build_pattern(slots, _random_guard(rng, names)))
    length = rng.randint(3, MAX_TRACE)
    trace = []
    for _ in range(length):
        tag = UNMATCHED_TAG if rng.random() < 0.08 else rng.choice(SCENARIO_TAGS)
        trace.append(Message(tag, rng.randrange(PAYLOAD_RANGE)))
    return Scenario(seed, patterns, trace)


@dataclass
class Divergence:
    seed: int
    engine: str
    expected: list[Fire]
    actual: list[Fire]


@dataclass
class DifferentialOutcome:
    traces_run: int = 0
    total_fires: int = 0
    divergences: list[Divergence] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.divergences


def run_differential_suite(
    traces: int = 1000,
    seed: int = 42,
    *,
    factories: Sequence[MatcherFactory] | None = None,
    workers: int | None = 2,
    stop_at: int = 5,
) -> DifferentialOutcome:
    """Replay ``traces`` random scenarios through every engine and the oracle.

    Collects up to ``stop_at`` diverging scenarios before giving up early; the
    divergence records carry the scenario seed for reproduction.
    """
    if factories is None:
        factories = all_factories(workers=workers)
    outcome = DifferentialOutcome()
    for i in range(traces):
        scenario = gen_random_scenario(seed + i)
        results = differential_replay(scenario.trace, scenario.patterns, factories)
        expected = results.pop("oracle")
        outcome.traces_run += 1
        outcome.total_fires += len(expected)
        for engine, fires in results.items():
            if fires != expected:
                outcome.divergences.append(
                    Divergence(scenario.seed, engine, expected, fires)
                )
        if len(outcome.divergences) >= stop_at:
            break
    return outcome
