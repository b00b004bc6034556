"""Engine-neutral matcher contract, factory registry, and the brute-force engine.

A matcher is owned by exactly one actor loop. It stamps messages as they are
taken from the mailbox, keeps whatever internal state its algorithm needs, and
reports fires; the loop runs the pattern's reaction. The central contract is
that every engine's fire sequence equals the oracle's for the same arrivals.
"""

from __future__ import annotations

from collections import Counter
from collections.abc import Hashable, Iterable, Mapping, Sequence
from dataclasses import dataclass
from typing import Any, ClassVar

from .core import (
    CONTINUE,
    DISCONNECTED,
    ArrivalCounter,
    CandidateMatch,
    Continue,
    Disconnected,
    EmptyPatternList,
    JoinPattern,
    LookupEnv,
    Message,
    MessageInstance,
    ResultControl,
    Stop,
    assemble_env,
    index_patterns,
    stamp,
)
from .oracle import Fire

FACTORY_IDENTIFIERS = (
    "brute-force",
    "stateful-tree",
    "while-lazy",
    "lazy-parallel",
    "filtering-parallel",
)


class MatchProbe:
    """Counts engine-internal events; used by tests and benchmark diagnostics."""

    def __init__(self) -> None:
        self.guard_evals: Counter[tuple[int, tuple[int, ...]]] = Counter()

    def guard_evaluated(self, pattern_index: int, slot_tuple: tuple[int, ...]) -> None:
        self.guard_evals[(pattern_index, slot_tuple)] += 1

    def evals_for_pattern(self, pattern_index: int) -> int:
        return sum(n for (p, _), n in self.guard_evals.items() if p == pattern_index)

    @property
    def total_guard_evals(self) -> int:
        return sum(self.guard_evals.values())


@dataclass(frozen=True)
class FiredMatch:
    """One fire: the winning candidate, its environment, and its pattern."""

    candidate: CandidateMatch
    env: LookupEnv
    pattern: JoinPattern

    @property
    def pattern_index(self) -> int:
        return self.candidate.pattern_index

    @property
    def key(self) -> tuple[int, ...]:
        return self.candidate.key


class Matcher:
    """Base class for all matching engines.

    Subclasses implement ``_ingest`` (buffer one stamped message and search)
    and ``_drain`` (search the already-buffered state), both returning the
    candidate to fire or None. Consumption and environment assembly are
    handled here so every engine fires identically.
    """

    identifier: ClassVar[str] = "abstract"

    def __init__(
        self,
        patterns: Sequence[JoinPattern],
        *,
        probe: MatchProbe | None = None,
        counter_start: int = 0,
        workers: int | None = None,
    ) -> None:
        if not patterns:
            raise EmptyPatternList("a matcher needs at least one pattern")
        self.patterns = index_patterns(patterns)
        self.probe = probe
        self._counter = ArrivalCounter(counter_start)
        self._buffer: dict[int, MessageInstance] = {}
        # Per pattern: tag -> slot positions expecting it.
        self._positions_by_tag: tuple[dict[Hashable, tuple[int, ...]], ...] = tuple(
            _group_positions(p) for p in self.patterns
        )
        # False once the current state has been searched without a fire; a
        # pure guard cannot change its mind on an unchanged buffer.
        self._dirty = False

    # -- engine hooks -------------------------------------------------------

    def _ingest(self, inst: MessageInstance) -> CandidateMatch | None:
        raise NotImplementedError

    def _drain(self) -> CandidateMatch | None:
        raise NotImplementedError

    def _on_consumed(self, consumed: set[int]) -> None:
        """Called after a fire removed ``consumed`` from the buffer."""

    # -- driving ------------------------------------------------------------

    def feed(self, message: Message) -> FiredMatch | None:
        """Stamp one message, route it to the engine, and fire if possible."""
        inst = stamp(message, self._counter)
        cand = self._ingest(inst)
        if cand is None:
            self._dirty = False
            return None
        return self._fire(cand)

    def poll(self) -> FiredMatch | None:
        """Attempt a fire from already-buffered state (the drain step)."""
        if not self._dirty:
            return None
        cand = self._drain()
        if cand is None:
            self._dirty = False
            return None
        return self._fire(cand)

    def run_until_fire(self, mailbox: Any, self_ref: Any) -> ResultControl | Disconnected:
        """Block until one pattern fires, run its reaction, return its result.

        Buffered state is drained first; otherwise messages are taken from the
        mailbox one at a time until a fire happens. A closed mailbox yields
        ``DISCONNECTED``.
        """
        fired = self.poll()
        while fired is None:
            item = mailbox.take()
            if item is DISCONNECTED:
                return DISCONNECTED
            fired = self.feed(item)
        result = fired.pattern.rhs(fired.env, self_ref)
        if result is None:
            return CONTINUE
        if not isinstance(result, (Continue, Stop)):
            raise TypeError(f"pattern rhs must return Continue, Stop, or None, got {result!r}")
        return result

    def close(self) -> None:
        """Release engine resources (worker pools); idempotent."""

    def __enter__(self) -> "Matcher":
        return self

    def __exit__(self, *exc: Any) -> None:
        self.close()

    # -- shared mechanics ---------------------------------------------------

    def _fire(self, cand: CandidateMatch) -> FiredMatch:
        pattern = self.patterns[cand.pattern_index]
        env = assemble_env(pattern, cand.slot_tuple, self._buffer)
        for idx in cand.key:
            del self._buffer[idx]
        self._on_consumed(set(cand.key))
        self._dirty = True
        return FiredMatch(cand, env, pattern)

    def _fits_any_pattern(self, tag: Hashable) -> bool:
        for positions in self._positions_by_tag:
            if tag in positions:
                return True
        return False

    @property
    def buffered_indices(self) -> tuple[int, ...]:
        return tuple(self._buffer)


def _group_positions(pattern: JoinPattern) -> dict[Hashable, tuple[int, ...]]:
    grouped: dict[Hashable, list[int]] = {}
    for pos, s in enumerate(pattern.slots):
        grouped.setdefault(s.expected_tag, []).append(pos)
    return {tag: tuple(positions) for tag, positions in grouped.items()}


def _brute_search(
    buffer: Mapping[int, MessageInstance],
    patterns: Sequence[JoinPattern],
    probe: MatchProbe | None = None,
) -> CandidateMatch | None:
    """Enumerate every injective tag-consistent combination, fairest-first result.

    Recomputed from scratch on every call; this is the stateless semantics and
    deliberately repeats work across arrivals.
    """
    by_tag: dict[Hashable, list[int]] = {}
    for idx, m in buffer.items():
        by_tag.setdefault(m.tag, []).append(idx)

    best: CandidateMatch | None = None
    best_fk: tuple[Any, ...] | None = None
    for pattern in patterns:
        groups: list[list[int]] = []
        for s in pattern.slots:
            g = by_tag.get(s.expected_tag)
            if not g:
                groups = []
                break
            groups.append(g)
        if not groups:
            continue
        size = pattern.size
        last = size - 1
        cursors = [0] * size
        picked = [-1] * size
        in_use: set[int] = set()
        pos = 0
        while pos >= 0:
            group = groups[pos]
            i = cursors[pos]
            chosen = -1
            while i < len(group):
                idx = group[i]
                i += 1
                if idx not in in_use:
                    chosen = idx
                    break
            if chosen < 0:
                cursors[pos] = 0
                pos -= 1
                if pos >= 0:
                    in_use.discard(picked[pos])
                    picked[pos] = -1
                continue
            cursors[pos] = i
            picked[pos] = chosen
            in_use.add(chosen)
            if pos == last:
                st = tuple(picked)
                key = tuple(sorted(st))
                fk = (key, pattern.pattern_index, st)
                if best_fk is None or fk < best_fk:
                    env = assemble_env(pattern, st, buffer)
                    if probe is not None:
                        probe.guard_evaluated(pattern.pattern_index, st)
                    if pattern.guard(env):
                        best = CandidateMatch(pattern.pattern_index, st, key)
                        best_fk = fk
                in_use.discard(chosen)
                picked[pos] = -1
            else:
                cursors[pos + 1] = 0
                pos += 1
    return best


def brute_force_ingest(
    buffer: dict[int, MessageInstance],
    msg: MessageInstance,
    patterns: Sequence[JoinPattern],
    probe: MatchProbe | None = None,
) -> CandidateMatch | None:
    """Append a freshly stamped message and recompute the fairest match."""
    buffer[msg.arrival_index] = msg
    return _brute_search(buffer, patterns, probe)


class BruteForceMatcher(Matcher):
    """Stateless engine: full re-enumeration of the buffer on every arrival."""

    identifier: ClassVar[str] = "brute-force"

    def _ingest(self, inst: MessageInstance) -> CandidateMatch | None:
        return brute_force_ingest(self._buffer, inst, self.patterns, self.probe)

    def _drain(self) -> CandidateMatch | None:
        return _brute_search(self._buffer, self.patterns, self.probe)


_ENGINES: dict[str, type[Matcher]] = {}


def register_engine(cls: type[Matcher]) -> type[Matcher]:
    _ENGINES[cls.identifier] = cls
    return cls


register_engine(BruteForceMatcher)


def _ensure_engines_loaded() -> None:
    if len(_ENGINES) < len(FACTORY_IDENTIFIERS):
        from . import parallel, tree  # noqa: F401  (registration side effect)


@dataclass(frozen=True)
class MatcherFactory:
    """Named constructor for one engine; each call yields fresh state."""

    identifier: str
    engine: type[Matcher]
    workers: int | None = None

    def instantiate(
        self,
        patterns: Sequence[JoinPattern],
        *,
        probe: MatchProbe | None = None,
        counter_start: int = 0,
    ) -> Matcher:
        return self.engine(
            patterns,
            probe=probe,
            counter_start=counter_start,
            workers=self.workers,
        )


def matcher_factory(identifier: str, *, workers: int | None = None) -> MatcherFactory:
    """Look up a factory by its CLI-visible identifier."""
    _ensure_engines_loaded()
    try:
        engine = _ENGINES[identifier]
    except KeyError:
        raise KeyError(
            f"unknown matcher {identifier!r}; expected one of {', '.join(FACTORY_IDENTIFIERS)}"
        ) from None
    return MatcherFactory(identifier, engine, workers)


def all_factories(*, workers: int | None = None) -> list[MatcherFactory]:
    return [matcher_factory(name, workers=workers) for name in FACTORY_IDENTIFIERS]


def factory_instantiate(
    factory: MatcherFactory,
    patterns: Sequence[JoinPattern],
    *,
    probe: MatchProbe | None = None,
    counter_start: int = 0,
) -> Matcher:
    """Build a fresh matcher; pattern indices follow list position."""
    return factory.instantiate(patterns, probe=probe, counter_start=counter_start)


class _ReplaySelfRef:
    """Self reference for mailbox-free replays; sends append to the trace."""

    __slots__ = ("_pending",)

    def __init__(self, pending: list[Message]) -> None:
        self._pending = pending

    def send(self, message: Message) -> None:
        self._pending.append(message)


def replay_fire_sequence(
    matcher: Matcher,
    trace: Iterable[Message],
    *,
    run_rhs: bool = False,
    max_fires: int | None = None,
) -> list[Fire]:
    """Feed a trace through a matcher and collect its fires in order.

    Reactions only run when ``run_rhs`` is set; their self-sends are appended
    to the trace, so they are stamped after everything already stamped.
    """
    pending = list(trace)
    fires: list[Fire] = []
    self_ref = _ReplaySelfRef(pending)
    cursor = 0
    while cursor < len(pending):
        fired = matcher.feed(pending[cursor])
        cursor += 1
        while fired is not None:
            fires.append(Fire(fired.pattern_index, fired.key))
            if run_rhs:
                fired.pattern.rhs(fired.env, self_ref)
            if max_fires is not None and len(fires) >= max_fires:
                return fires
            fired = matcher.poll()
    return fires
