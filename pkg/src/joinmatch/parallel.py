"""Parallel ramification over fairness-ordered partitions, plus message filtering.

Each matching round snapshots a pattern's parent nodes in fairness order,
splits them into contiguous partitions, and lazily ramifies every partition on
its own worker. A worker that finds a guard-true completion cancels all
less-fair partitions; since every key in a lower-ranked partition precedes
every key in a higher-ranked one, the fairest reported match is the same one a
sequential lazy ramification would have found. Workers never write shared
state: each returns a mutation log that the owning loop merges.
"""

from __future__ import annotations

import os
import threading
from collections.abc import Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import ClassVar

from .core import (
    CandidateMatch,
    JoinPattern,
    MessageInstance,
    _check_filters,
    assemble_env,
    fairness_key,
)
from .kernel import MatchProbe, register_engine
from .tree import (
    Assignment,
    MatchingTree,
    NodeKey,
    TreeMatcherBase,
    _extend_assignments,
    _merged_key,
    fitting_positions,
    lazy_ramify,
)

WORKERS_ENV_VAR = "JOINMATCH_WORKERS"


def resolve_workers(explicit: int | None = None) -> int:
    """Worker count: explicit setting, else the environment, else hardware threads."""
    if explicit is not None:
        return max(1, explicit)
    env = os.environ.get(WORKERS_ENV_VAR)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def validate_filter(pattern: JoinPattern) -> None:
    """Reject filters on slots whose message tag repeats within the pattern.

    A filter may only discard a message when no other slot could still accept
    it, which holds exactly when the slot's tag is unique in the pattern.
    """
    _check_filters(pattern.slots)


def admit_message(
    msg: MessageInstance, patterns: Sequence[JoinPattern]
) -> list[bool]:
    """Per-pattern admission: False means the message cannot reach any fire.

    A pattern admits a message when some slot of the message's tag either has
    no filter or has a filter that accepts the payload. A message admitted by
    no pattern can be dropped without entering the buffer.
    """
    decisions: list[bool] = []
    for pattern in patterns:
        admitted = False
        for s in pattern.slots:
            if s.expected_tag != msg.tag:
                continue
            if s.filter is None or s.filter(msg.payload):
                admitted = True
                break
        decisions.append(admitted)
    return decisions


@dataclass(frozen=True)
class Partition:
    """A contiguous, fairness-ordered slice of a pattern's parent nodes."""

    rank: int
    parents: tuple[tuple[NodeKey, tuple[Assignment, ...]], ...]


class CancellationToken:
    """Cooperative cancellation shared by one matching round's workers.

    Once a worker at rank r reports a match, every worker at a higher rank
    stops at its next observation point (between node extensions).
    """

    __slots__ = ("_lock", "_winning_rank")

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._winning_rank: int | None = None

    def cancel_above(self, rank: int) -> None:
        with self._lock:
            if self._winning_rank is None or rank < self._winning_rank:
                self._winning_rank = rank

    def cancelled_for(self, rank: int) -> bool:
        winner = self._winning_rank
        return winner is not None and rank > winner


def partition_nodes(tree: MatchingTree, n: int) -> list[Partition]:
    """Split the tree's parents into at most ``n`` near-equal contiguous slices.

    Slices preserve ascending-lexicographic key order, so lower ranks hold the
    fairer parents. Fewer parents than workers yields singleton partitions.
    """
    if n < 1:
        raise ValueError("worker count must be >= 1")
    parents = sorted(tree.nodes.items(), key=lambda kv: kv[0])
    snapshot = [(key, tuple(assignments)) for key, assignments in parents]
    count = len(snapshot)
    k = min(n, count)
    if k == 0:
        return []
    base, extra = divmod(count, k)
    partitions: list[Partition] = []
    start = 0
    for rank in range(k):
        width = base + (1 if rank < extra else 0)
        partitions.append(Partition(rank, tuple(snapshot[start : start + width])))
        start += width
    return partitions


@dataclass
class _WorkerOutcome:
    report: CandidateMatch | None
    new_nodes: list[tuple[NodeKey, Assignment]]
    new_failed: list[tuple[NodeKey, tuple[int, ...]]]
    guard_evals: list[tuple[int, ...]]


def _ramify_partition(
    partition: Partition,
    msg: MessageInstance,
    pattern: JoinPattern,
    positions: Sequence[int],
    buffer: Mapping[int, MessageInstance],
    failed: set[tuple[NodeKey, tuple[int, ...]]],
    token: CancellationToken,
) -> _WorkerOutcome:
    """Lazily ramify one partition against the new message.

    Reads the shared tree snapshot and buffer only; all mutations land in the
    returned log. Reports the partition's fairest guard-true completion and
    cancels all less-fair partitions when one is found.
    """
    index = msg.arrival_index
    out = _WorkerOutcome(None, [], [], [])
    for key, assignments in partition.parents:
        if token.cancelled_for(partition.rank):
            break
        child_key = _merged_key(key, index)
        partial, complete = _extend_assignments(assignments, index, positions)
        for child in partial:
            out.new_nodes.append((child_key, child))
        for st in complete:
            if (child_key, st) in failed:
                continue
            env = assemble_env(pattern, st, buffer)
            out.guard_evals.append(st)
            if pattern.guard(env):
                out.report = CandidateMatch(pattern.pattern_index, st, child_key)
                token.cancel_above(partition.rank)
                return out
            out.new_failed.append((child_key, st))
    return out


def parallel_lazy_match(
    tree: MatchingTree,
    msg: MessageInstance,
    pattern: JoinPattern,
    buffer: Mapping[int, MessageInstance],
    n: int,
    pool: ThreadPoolExecutor | None = None,
    probe: MatchProbe | None = None,
) -> CandidateMatch | None:
    """One parallel matching round; equivalent to ``lazy_ramify`` for any n.

    With a single partition (or n == 1) the round runs inline on the calling
    loop. Worker mutation logs are merged in rank order after all workers stop.
    """
    positions = fitting_positions(pattern, msg)
    if not positions:
        return None
    if n == 1:
        return lazy_ramify(tree, msg, pattern, buffer, probe)
    partitions = partition_nodes(tree, n)
    token = CancellationToken()
    if len(partitions) == 1:
        outcomes = [
            _ramify_partition(partitions[0], msg, pattern, positions, buffer, tree.failed, token)
        ]
    else:
        if pool is None:
            raise RuntimeError("parallel round requires a worker pool")
        futures = [
            pool.submit(
                _ramify_partition, part, msg, pattern, positions, buffer, tree.failed, token
            )
            for part in partitions
        ]
        outcomes = [f.result() for f in futures]

    best: CandidateMatch | None = None
    best_fk = None
    for outcome in outcomes:
        for key, assignment in outcome.new_nodes:
            tree.add(key, assignment)
        tree.failed.update(outcome.new_failed)
        if probe is not None:
            for st in outcome.guard_evals:
                probe.guard_evaluated(pattern.pattern_index, st)
        if outcome.report is not None:
            fk = fairness_key(outcome.report)
            if best_fk is None or fk < best_fk:
                best, best_fk = outcome.report, fk
    return best


class ParallelMatcherBase(TreeMatcherBase):
    """Tree engine running each pattern's ramification round on a worker pool."""

    def __init__(self, patterns, *, workers: int | None = None, **kwargs) -> None:
        super().__init__(patterns, **kwargs)
        self.workers = resolve_workers(workers)
        self._pool: ThreadPoolExecutor | None = None

    def _get_pool(self) -> ThreadPoolExecutor:
        if self._pool is None:
            self._pool = ThreadPoolExecutor(
                max_workers=self.workers, thread_name_prefix="joinmatch-worker"
            )
        return self._pool

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown(wait=True)
            self._pool = None

    def _match_round(self, i: int, inst: MessageInstance) -> CandidateMatch | None:
        pool = self._get_pool() if self.workers > 1 else None
        return parallel_lazy_match(
            self.trees[i],
            inst,
            self.patterns[i],
            self._buffer,
            self.workers,
            pool=pool,
            probe=self.probe,
        )

    def _run_rounds(self, inst: MessageInstance, admitted: Sequence[bool]) -> CandidateMatch | None:
        best: CandidateMatch | None = None
        best_fk = None
        for i in range(len(self.patterns)):
            if not admitted[i] or inst.tag not in self._positions_by_tag[i]:
                continue
            cand = self._match_round(i, inst)
            if cand is not None:
                fk = fairness_key(cand)
                if best_fk is None or fk < best_fk:
                    best, best_fk = cand, fk
        return best


@register_engine
class LazyParallelMatcher(ParallelMatcherBase):
    """Lazy ramification parallelised over fairness-ordered partitions."""

    identifier: ClassVar[str] = "lazy-parallel"

    def _ingest(self, inst: MessageInstance) -> CandidateMatch | None:
        if not self._fits_any_pattern(inst.tag):
            return None
        self._buffer[inst.arrival_index] = inst
        return self._run_rounds(inst, [True] * len(self.patterns))


@register_engine
class FilteringParallelMatcher(ParallelMatcherBase):
    """Parallel engine that pre-filters messages via per-slot guard clauses.

    A message rejected by every pattern is dropped before it can touch the
    buffer or any tree; one admitted by only some patterns is ramified only in
    those patterns' trees.
    """

    identifier: ClassVar[str] = "filtering-parallel"

    def _ingest(self, inst: MessageInstance) -> CandidateMatch | None:
        admitted = admit_message(inst, self.patterns)
        if not any(admitted):
            return None
        self._buffer[inst.arrival_index] = inst
        return self._run_rounds(inst, admitted)
