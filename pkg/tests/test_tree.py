"""Matching trees: ramification, fairest traversal, pruning, lazy variant."""

from __future__ import annotations

import random

import pytest

from joinmatch import (
    ArrivalCounter,
    MatchProbe,
    Message,
    build_pattern,
    factory_instantiate,
    matcher_factory,
    replay_fire_sequence,
    slot,
    stamp,
)
from joinmatch.oracle import fairest_match, oracle_fire_sequence
from joinmatch.tree import (
    MatchingTree,
    dump_tree,
    lazy_ramify,
    prune_on_fire,
    ramify,
    traverse_fairest,
)

from helpers import audit_tree, msgs, stamp_all, unguarded


def fig1_setup():
    """Pattern A && B && C and the mailbox A@1, C@2, B@3, D@4."""
    pattern = unguarded("A", "B", "C").with_index(0)
    counter = ArrivalCounter(start=1)
    instances = [stamp(m, counter) for m in msgs("A", "C", "B", "D")]
    buffer = {i.arrival_index: i for i in instances}
    return pattern, instances, buffer


class TestRamify:
    def test_partial_nodes_after_two_arrivals(self):
        pattern, (a, c, _, _), buffer = fig1_setup()
        tree = MatchingTree(pattern.size)
        assert ramify(tree, a, pattern) == []
        assert ramify(tree, c, pattern) == []
        assert set(tree.nodes) == {(), (1,), (2,), (1, 2)}
        assert tree.nodes[(1, 2)] == {(1, None, 2)}

    def test_third_arrival_completes_the_pattern(self):
        pattern, (a, c, b, _), buffer = fig1_setup()
        tree = MatchingTree(pattern.size)
        ramify(tree, a, pattern)
        ramify(tree, c, pattern)
        completed = ramify(tree, b, pattern)
        assert completed == [(1, 3, 2)]
        assert (1, 2, 3) in tree.complete_keys

    def test_unmatchable_tag_leaves_tree_unchanged(self):
        pattern, (a, c, b, d), buffer = fig1_setup()
        tree = MatchingTree(pattern.size)
        for inst in (a, c, b):
            ramify(tree, inst, pattern)
        before = {k: set(v) for k, v in tree.nodes.items()}
        assert ramify(tree, d, pattern) == []
        assert tree.nodes == before

    def test_duplicate_tags_create_both_arrangements(self):
        pattern = unguarded("A", "A").with_index(0)
        tree = MatchingTree(2)
        buffer = stamp_all(msgs("A", "A"))
        ramify(tree, buffer[0], pattern)
        completed = ramify(tree, buffer[1], pattern)
        assert completed == [(0, 1), (1, 0)]

    def test_failed_leaves_are_not_recreated(self):
        pattern = unguarded("A", "B").with_index(0)
        tree = MatchingTree(2)
        buffer = stamp_all(msgs("A", "B"))
        tree.failed.add(((0, 1), (0, 1)))
        ramify(tree, buffer[0], pattern)
        assert ramify(tree, buffer[1], pattern) == []
        assert (0, 1) not in tree.nodes


class TestTraverseFairest:
    def test_prefers_older_key_among_guard_true_leaves(self):
        pattern = unguarded("A", "B").with_index(0)
        buffer = stamp_all(msgs("A", "A", "B"))
        tree = MatchingTree(2)
        for inst in buffer.values():
            ramify(tree, inst, pattern)
        best = traverse_fairest(tree, pattern, buffer)
        assert best.key == (0, 2)
        assert best == fairest_match(buffer, [pattern])

    def test_guard_false_leaf_is_pruned_and_remembered(self):
        pattern = build_pattern(
            [slot("A", "x"), slot("B", "y")], lambda env: env["x"] == env["y"]
        ).with_index(0)
        buffer = stamp_all([Message("A", 1), Message("B", 2)])
        tree = MatchingTree(2)
        for inst in buffer.values():
            ramify(tree, inst, pattern)
        nodes_before = tree.node_count()
        assert traverse_fairest(tree, pattern, buffer) is None
        assert tree.node_count() == nodes_before - 1
        assert ((0, 1), (0, 1)) in tree.failed
        assert (0, 1) not in tree.nodes

    def test_empty_tree_yields_nothing(self):
        pattern = unguarded("A").with_index(0)
        assert traverse_fairest(MatchingTree(1), pattern, {}) is None


class TestPruneOnFire:
    def test_figure_fire_removes_every_touching_node(self):
        pattern, (a, c, b, _), buffer = fig1_setup()
        tree = MatchingTree(pattern.size)
        for inst in (a, c, b):
            ramify(tree, inst, pattern)
        prune_on_fire([tree], {1, 2, 3})
        assert set(tree.nodes) == {()}
        assert tree.complete_keys == set()

    def test_disjoint_consumption_leaves_tree_alone(self):
        pattern, (a, c, _, _), buffer = fig1_setup()
        tree = MatchingTree(pattern.size)
        ramify(tree, a, pattern)
        ramify(tree, c, pattern)
        before = dict(tree.nodes)
        prune_on_fire([tree], {7, 8})
        assert tree.nodes == before

    def test_overlapping_patterns_both_lose_shared_nodes(self):
        first = unguarded("A", "B").with_index(0)
        second = unguarded("A", "C").with_index(1)
        buffer = stamp_all(msgs("A", "B", "C"))
        trees = [MatchingTree(2), MatchingTree(2)]
        for inst in buffer.values():
            ramify(trees[0], inst, first)
            ramify(trees[1], inst, second)
        assert (0,) in trees[0].nodes and (0,) in trees[1].nodes
        prune_on_fire(trees, {0, 1})
        assert (0,) not in trees[0].nodes
        assert (0,) not in trees[1].nodes  # the shared A is gone everywhere
        assert (2,) in trees[1].nodes

    def test_failed_entries_with_consumed_indices_are_dropped(self):
        tree = MatchingTree(2)
        tree.failed = {((0, 1), (0, 1)), ((2, 3), (2, 3))}
        prune_on_fire([tree], {1})
        assert tree.failed == {((2, 3), (2, 3))}


class TestLazyRamify:
    def test_halts_at_first_guard_true_completion(self):
        pattern, (a, c, b, _), buffer = fig1_setup()
        tree = MatchingTree(pattern.size)
        lazy_ramify(tree, a, pattern, buffer)
        lazy_ramify(tree, c, pattern, buffer)
        best = lazy_ramify(tree, b, pattern, buffer)
        assert best is not None and best.key == (1, 2, 3)
        # Parents after {1,2} were never extended: no {2,3} node, and the
        # completed leaf itself is not materialized.
        assert (2, 3) not in tree.nodes
        assert (1, 2, 3) not in tree.nodes

    def test_all_false_guards_end_in_the_same_state_as_full_ramify(self):
        guard = lambda env: False
        rng = random.Random(17)
        for _ in range(30):
            tags = [rng.choice("AB") for _ in range(rng.randint(2, 8))]
            pattern = build_pattern(
                [slot("A", "x"), slot("B", "y")], guard
            ).with_index(0)
            buffer = stamp_all([Message(t, rng.randrange(3)) for t in tags])
            lazy_tree, full_tree = MatchingTree(2), MatchingTree(2)
            for inst in buffer.values():
                assert lazy_ramify(lazy_tree, inst, pattern, buffer) is None
                ramify(full_tree, inst, pattern)
                assert traverse_fairest(full_tree, pattern, buffer) is None
            assert lazy_tree.nodes == full_tree.nodes
            assert lazy_tree.failed == full_tree.failed

    def test_non_completing_message_ramifies_exactly_like_full(self):
        pattern = unguarded("A", "B", "C").with_index(0)
        buffer = stamp_all(msgs("A", "A", "B"))
        lazy_tree, full_tree = MatchingTree(3), MatchingTree(3)
        for inst in buffer.values():
            lazy_ramify(lazy_tree, inst, pattern, buffer)
            ramify(full_tree, inst, pattern)
        assert lazy_tree.nodes == full_tree.nodes


class TestTreeEngines:
    @pytest.mark.parametrize("engine", ["stateful-tree", "while-lazy"])
    def test_fig1_replay(self, engine):
        matcher = factory_instantiate(
            matcher_factory(engine), [unguarded("A", "B", "C")], counter_start=1
        )
        fires = replay_fire_sequence(matcher, msgs("A", "C", "B", "D"))
        assert [(f.pattern_index, f.key) for f in fires] == [(0, (1, 2, 3))]

    def test_stateful_and_lazy_agree_on_random_traces(self):
        rng = random.Random(123)
        patterns = [
            build_pattern([slot("A", "x"), slot("B", "y")], lambda env: env["x"] <= env["y"]),
            unguarded("B", "C"),
        ]
        for _ in range(60):
            trace = [
                Message(rng.choice("ABCX"), rng.randrange(3))
                for _ in range(rng.randint(0, 18))
            ]
            runs = {}
            for engine in ("stateful-tree", "while-lazy"):
                matcher = factory_instantiate(matcher_factory(engine), patterns)
                runs[engine] = replay_fire_sequence(matcher, trace)
            assert runs["stateful-tree"] == runs["while-lazy"]
            assert runs["while-lazy"] == oracle_fire_sequence(trace, patterns)

    @pytest.mark.parametrize("engine", ["stateful-tree", "while-lazy"])
    def test_structural_audit_after_every_event(self, engine):
        rng = random.Random(7)
        patterns = [unguarded("A", "B", "A"), unguarded("C")]
        for _ in range(25):
            matcher = factory_instantiate(matcher_factory(engine), patterns)
            for _ in range(rng.randint(1, 20)):
                matcher.feed(Message(rng.choice("ABCX"), rng.randrange(3)))
                for tree, pattern in zip(matcher.trees, matcher.patterns):
                    audit_tree(tree, pattern, matcher._buffer)

    @pytest.mark.parametrize("engine", ["stateful-tree", "while-lazy"])
    def test_guard_evaluated_at_most_once_per_assignment(self, engine):
        rng = random.Random(55)
        pattern = build_pattern(
            [slot("A", "x"), slot("B", "y")], lambda env: env["x"] == env["y"]
        )
        for _ in range(40):
            probe = MatchProbe()
            matcher = factory_instantiate(matcher_factory(engine), [pattern], probe=probe)
            for _ in range(rng.randint(2, 20)):
                matcher.feed(Message(rng.choice("AB"), rng.randrange(2)))
            assert all(count <= 1 for count in probe.guard_evals.values()), (
                f"an assignment was re-evaluated: {probe.guard_evals}"
            )


class TestDump:
    def test_fig1_dump_after_step_two(self):
        matcher = factory_instantiate(
            matcher_factory("stateful-tree"), [unguarded("A", "B", "C")], counter_start=1
        )
        matcher.feed(Message("A"))
        matcher.feed(Message("C"))
        assert dump_tree(matcher.trees[0]) == "\n".join(
            ["{1}: (1,_,_)", "{1,2}: (1,_,2)", "{2}: (_,_,2)"]
        )

    def test_dump_is_deterministic(self):
        pattern = unguarded("A", "A").with_index(0)
        buffer = stamp_all(msgs("A", "A"))
        tree = MatchingTree(2)
        for inst in buffer.values():
            ramify(tree, inst, pattern)
        assert dump_tree(tree) == dump_tree(tree)
        assert "{0,1}: (0,1) (1,0)" in dump_tree(tree)
