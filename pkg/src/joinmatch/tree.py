"""Stateful matching-tree engines: full and lazy short-circuiting ramification.

One tree per pattern maps sets of buffered arrival indices to the partial slot
assignments spanning them. Trees grow ("ramify") as messages arrive and are
pruned when a fire consumes messages or a guard rejects a completion. The
load-bearing invariant: visiting parents in ascending-lexicographic key order
visits completions in fairness order, so the first guard-true completion found
during a lazy ramification is the fairest one the pattern can currently fire.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from typing import ClassVar

from .core import (
    CandidateMatch,
    JoinPattern,
    MessageInstance,
    assemble_env,
    fairness_key,
)
from .kernel import MatchProbe, Matcher, register_engine

# A partial assignment is a tuple aligned with the pattern's slots; unfilled
# positions hold None. Complete assignments contain no None.
Assignment = tuple[int | None, ...]
NodeKey = tuple[int, ...]


class MatchingTree:
    """Per-pattern incremental matching state.

    ``nodes`` maps each sorted arrival-index key to the assignments spanning
    exactly that key; the root is the empty key holding the empty assignment.
    ``failed`` remembers completed assignments whose guard evaluated false, so
    they are never evaluated or re-created again. ``complete_keys`` indexes the
    keys currently holding complete assignments.
    """

    __slots__ = ("size", "nodes", "failed", "complete_keys")

    def __init__(self, size: int) -> None:
        self.size = size
        self.nodes: dict[NodeKey, set[Assignment]] = {(): {(None,) * size}}
        self.failed: set[tuple[NodeKey, tuple[int, ...]]] = set()
        self.complete_keys: set[NodeKey] = set()

    def add(self, key: NodeKey, assignment: Assignment) -> None:
        self.nodes.setdefault(key, set()).add(assignment)
        if len(key) == self.size:
            self.complete_keys.add(key)

    def node_count(self) -> int:
        """Number of non-root nodes."""
        return len(self.nodes) - 1


def _merged_key(key: NodeKey, index: int) -> NodeKey:
    return tuple(sorted(key + (index,)))


def _extend_assignments(
    assignments: Iterable[Assignment], index: int, positions: Sequence[int]
) -> tuple[list[Assignment], list[tuple[int, ...]]]:
    """Extend each assignment with ``index`` at every fitting unfilled slot.

    Returns (still-partial extensions, completions sorted by slot tuple).
    """
    partial: list[Assignment] = []
    complete: list[tuple[int, ...]] = []
    for a in assignments:
        for p in positions:
            if a[p] is None:
                child = a[:p] + (index,) + a[p + 1 :]
                if None in child:
                    partial.append(child)
                else:
                    complete.append(child)
    complete.sort()
    return partial, complete


def fitting_positions(pattern: JoinPattern, msg: MessageInstance) -> tuple[int, ...]:
    return tuple(p for p, s in enumerate(pattern.slots) if s.expected_tag == msg.tag)


def ramify(
    tree: MatchingTree, msg: MessageInstance, pattern: JoinPattern
) -> list[tuple[int, ...]]:
    """Full ramification: extend every node with the new message.

    Completed assignments are added as leaves and returned, fairest first;
    completions recorded in ``failed`` are not re-created.
    """
    positions = fitting_positions(pattern, msg)
    if not positions:
        return []
    index = msg.arrival_index
    staged: list[tuple[NodeKey, Assignment]] = []
    completed: list[tuple[NodeKey, tuple[int, ...]]] = []
    for key, assignments in tree.nodes.items():
        child_key = _merged_key(key, index)
        partial, complete = _extend_assignments(assignments, index, positions)
        for child in partial:
            staged.append((child_key, child))
        for child in complete:
            if (child_key, child) in tree.failed:
                continue
            staged.append((child_key, child))
            completed.append((child_key, child))
    for key, assignment in staged:
        tree.add(key, assignment)
    completed.sort(key=lambda kc: (kc[0], kc[1]))
    return [assignment for _, assignment in completed]


def traverse_fairest(
    tree: MatchingTree,
    pattern: JoinPattern,
    buffer: Mapping[int, MessageInstance],
    probe: MatchProbe | None = None,
) -> CandidateMatch | None:
    """Depth-first traversal: the first guard-true complete assignment.

    Complete assignments are visited in fairness order; each guard is evaluated
    at most once, with false results moved to ``failed`` and their leaves
    pruned so they are never checked again.
    """
    for key in sorted(tree.complete_keys):
        assignments = tree.nodes.get(key)
        if not assignments:
            tree.complete_keys.discard(key)
            continue
        for st in sorted(assignments):
            env = assemble_env(pattern, st, buffer)
            if probe is not None:
                probe.guard_evaluated(pattern.pattern_index, st)
            if pattern.guard(env):
                return CandidateMatch(pattern.pattern_index, st, key)
            tree.failed.add((key, st))
            assignments.discard(st)
        if not assignments:
            del tree.nodes[key]
            tree.complete_keys.discard(key)
    return None


def prune_on_fire(trees: Iterable[MatchingTree], consumed: set[int]) -> None:
    """Remove every node and failed entry whose key intersects the consumed set."""
    for tree in trees:
        dead = [key for key in tree.nodes if any(i in consumed for i in key)]
        for key in dead:
            del tree.nodes[key]
            tree.complete_keys.discard(key)
        if tree.failed:
            tree.failed = {
                entry for entry in tree.failed if not any(i in consumed for i in entry[0])
            }


def lazy_ramify(
    tree: MatchingTree,
    msg: MessageInstance,
    pattern: JoinPattern,
    buffer: Mapping[int, MessageInstance],
    probe: MatchProbe | None = None,
) -> CandidateMatch | None:
    """Ramify in fairest-first parent order, halting at the first guard-true
    completion.

    Partial extensions made before the halt are kept; guard-false completions
    go to ``failed`` without creating leaves. Any completion necessarily
    contains the new message, so whatever fire this round produces will prune
    everything the halt skipped.
    """
    positions = fitting_positions(pattern, msg)
    if not positions:
        return None
    index = msg.arrival_index
    parents = sorted(tree.nodes.items(), key=lambda kv: kv[0])
    for key, assignments in parents:
        child_key = _merged_key(key, index)
        partial, complete = _extend_assignments(assignments, index, positions)
        for child in partial:
            tree.add(child_key, child)
        for st in complete:
            if (child_key, st) in tree.failed:
                continue
            env = assemble_env(pattern, st, buffer)
            if probe is not None:
                probe.guard_evaluated(pattern.pattern_index, st)
            if pattern.guard(env):
                return CandidateMatch(pattern.pattern_index, st, child_key)
            tree.failed.add((child_key, st))
    return None


def dump_tree(tree: MatchingTree) -> str:
    """Deterministic textual rendering: keys ascending, assignments by slot tuple.

    The empty root is omitted. Unfilled slots render as ``_``.
    """
    lines = []
    for key in sorted(k for k in tree.nodes if k):
        assignments = sorted(
            tree.nodes[key], key=lambda a: tuple(-1 if x is None else x for x in a)
        )
        shown = " ".join(
            "(" + ",".join("_" if x is None else str(x) for x in a) + ")"
            for a in assignments
        )
        lines.append("{" + ",".join(str(i) for i in key) + "}: " + shown)
    return "\n".join(lines)


class TreeMatcherBase(Matcher):
    """Shared state handling for the tree-backed engines."""

    def __init__(self, patterns, **kwargs) -> None:
        super().__init__(patterns, **kwargs)
        self.trees = [MatchingTree(p.size) for p in self.patterns]

    def _drain(self) -> CandidateMatch | None:
        best: CandidateMatch | None = None
        best_fk = None
        for i, pattern in enumerate(self.patterns):
            cand = traverse_fairest(self.trees[i], pattern, self._buffer, self.probe)
            if cand is not None:
                fk = fairness_key(cand)
                if best_fk is None or fk < best_fk:
                    best, best_fk = cand, fk
        return best

    def _on_consumed(self, consumed: set[int]) -> None:
        prune_on_fire(self.trees, consumed)


@register_engine
class StatefulTreeMatcher(TreeMatcherBase):
    """Full ramification on every arrival, then a fairest-first traversal."""

    identifier: ClassVar[str] = "stateful-tree"

    def _ingest(self, inst: MessageInstance) -> CandidateMatch | None:
        if not self._fits_any_pattern(inst.tag):
            return None
        self._buffer[inst.arrival_index] = inst
        for i, pattern in enumerate(self.patterns):
            if inst.tag in self._positions_by_tag[i]:
                ramify(self.trees[i], inst, pattern)
        return self._drain()


@register_engine
class WhileLazyMatcher(TreeMatcherBase):
    """Lazy ramification: short-circuits at the first guard-true completion."""

    identifier: ClassVar[str] = "while-lazy"

    def _ingest(self, inst: MessageInstance) -> CandidateMatch | None:
        if not self._fits_any_pattern(inst.tag):
            return None
        self._buffer[inst.arrival_index] = inst
        best: CandidateMatch | None = None
        best_fk = None
        for i, pattern in enumerate(self.patterns):
            if inst.tag not in self._positions_by_tag[i]:
                continue
            cand = lazy_ramify(self.trees[i], inst, pattern, self._buffer, self.probe)
            if cand is not None:
                fk = fairness_key(cand)
                if best_fk is None or fk < best_fk:
                    best, best_fk = cand, fk
        return best
