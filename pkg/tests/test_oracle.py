"""Brute-force oracle: enumeration, fairest selection, replay, trace files."""

from __future__ import annotations

import itertools
import random

from joinmatch import (
    Message,
    all_factories,
    build_pattern,
    candidate,
    fairness_key,
    slot,
)
from joinmatch.oracle import (
    Fire,
    differential_replay,
    enumerate_matches,
    fairest_match,
    format_fire,
    format_fire_log,
    oracle_fire_sequence,
    parse_trace,
)

from helpers import msgs, stamp_all, unguarded


class TestEnumerateMatches:
    def test_single_complete_combination(self):
        # Mailbox A@1, C@2, B@3, D@4 against A && B && C: one candidate over
        # the first three arrivals; D fits nothing.
        buffer = stamp_all(msgs("A", "C", "B", "D"), start=1)
        found = enumerate_matches(buffer, [unguarded("A", "B", "C")])
        assert len(found) == 1
        assert found[0].key == (1, 2, 3)
        assert found[0].slot_tuple == (1, 3, 2)

    def test_empty_buffer_yields_nothing(self):
        assert enumerate_matches({}, [unguarded("A", "B")]) == []

    def test_two_candidates_with_shared_message(self):
        buffer = stamp_all(msgs("A", "A", "B"))
        found = enumerate_matches(buffer, [unguarded("A", "B")])
        assert [c.key for c in found] == [(0, 2), (1, 2)]

    def test_results_sorted_fairest_first(self):
        rng = random.Random(5)
        buffer = stamp_all([Message(rng.choice("AB")) for _ in range(10)])
        found = enumerate_matches(buffer, [unguarded("A", "B"), unguarded("B")])
        keys = [fairness_key(c) for c in found]
        assert keys == sorted(keys)

    def test_guard_false_candidates_excluded(self):
        buffer = stamp_all([Message("A", 1), Message("B", 2)])
        pattern = build_pattern(
            [slot("A", "x"), slot("B", "y")], lambda env: env["x"] == env["y"]
        )
        assert enumerate_matches(buffer, [pattern]) == []

    def test_exhaustive_soundness_on_small_buffers(self):
        # Against independent itertools enumeration for n <= 8.
        rng = random.Random(11)
        pattern = unguarded("A", "B", "A")
        for _ in range(30):
            n = rng.randint(0, 8)
            buffer = stamp_all([Message(rng.choice("ABX")) for _ in range(n)])
            found = enumerate_matches(buffer, [pattern])
            expected = set()
            indices = list(buffer)
            for combo in itertools.permutations(indices, 3):
                tags = [buffer[i].tag for i in combo]
                if tags == ["A", "B", "A"]:
                    expected.add(combo)
            assert {c.slot_tuple for c in found} == expected
            k = pattern.size
            bound = len(indices) ** k
            assert len(found) <= bound
            for c in found:
                assert len(set(c.slot_tuple)) == k


class TestFairestMatch:
    def test_single_candidate_is_returned(self):
        buffer = stamp_all(msgs("A", "B"))
        best = fairest_match(buffer, [unguarded("A", "B")])
        assert best == candidate(0, (0, 1))

    def test_oldest_first_among_two(self):
        buffer = stamp_all(msgs("A", "A", "B"))
        best = fairest_match(buffer, [unguarded("A", "B")])
        assert best.key == (0, 2)

    def test_declaration_order_breaks_key_ties(self):
        buffer = stamp_all(msgs("A", "B"))
        patterns = [unguarded("A", "B"), unguarded("A", "B")]
        assert fairest_match(buffer, patterns).pattern_index == 0

    def test_absent_when_no_guard_true_candidate(self):
        buffer = stamp_all(msgs("A"))
        assert fairest_match(buffer, [unguarded("A", "B")]) is None

    def test_equals_min_of_enumerate(self):
        rng = random.Random(23)
        patterns = [unguarded("A", "B"), unguarded("B", "C")]
        for _ in range(50):
            buffer = stamp_all([Message(rng.choice("ABCX")) for _ in range(rng.randint(0, 10))])
            everything = enumerate_matches(buffer, patterns)
            best = fairest_match(buffer, patterns)
            assert best == (everything[0] if everything else None)

    def test_stability_under_newer_arrivals(self):
        # Adding a strictly newer message never changes the minimum among
        # candidates that exclude it.
        rng = random.Random(31)
        patterns = [unguarded("A", "B")]
        for _ in range(50):
            buffer = stamp_all([Message(rng.choice("AB")) for _ in range(rng.randint(2, 9))])
            before = fairest_match(buffer, patterns)
            newest = max(buffer) + 1
            extended = dict(buffer)
            extended[newest] = stamp_all([Message(rng.choice("AB"))], start=newest)[newest]
            after = enumerate_matches(extended, patterns)
            surviving = [c for c in after if newest not in c.key]
            if before is None:
                assert surviving == []
            else:
                assert surviving[0] == before


class TestOracleReplay:
    def test_single_fire_consumes_messages(self):
        fires = oracle_fire_sequence(
            msgs("A", "C", "B", "D"), [unguarded("A", "B", "C")], counter_start=1
        )
        assert fires == [Fire(0, (1, 2, 3))]

    def test_unmatchable_trace_never_fires(self):
        assert oracle_fire_sequence(msgs("X", "Y", "Z"), [unguarded("A", "B")]) == []

    def test_no_candidate_survives_a_fire_it_overlaps(self):
        # After each fire the consumed indices are gone; with one B, the two
        # A-candidates can never both fire.
        fires = oracle_fire_sequence(msgs("A", "A", "B"), [unguarded("A", "B")])
        assert fires == [Fire(0, (0, 2))]

    def test_rhs_self_sends_are_stamped_after_existing_messages(self):
        collected = []

        def rhs(env, self_ref):
            collected.append(env["x"])
            if env["x"] == 1:
                self_ref.send(Message("A", 99))
            return None

        pattern = build_pattern([slot("A", "x")], None, rhs)
        fires = oracle_fire_sequence(
            [Message("A", 1), Message("A", 2)], [pattern], run_rhs=True
        )
        # The self-sent message lands after the original two.
        assert [f.key for f in fires] == [(0,), (1,), (2,)]
        assert collected == [1, 2, 99]


class TestDifferentialReplay:
    def test_figure_scenario_agrees_across_all_engines(self):
        results = differential_replay(
            msgs("A", "C", "B", "D"),
            [unguarded("A", "B", "C")],
            all_factories(workers=2),
            counter_start=1,
        )
        assert set(results) == {"oracle", *[f.identifier for f in all_factories()]}
        for fires in results.values():
            assert fires == [Fire(0, (1, 2, 3))]

    def test_unmatchable_tags_fire_nowhere(self):
        results = differential_replay(
            msgs("X", "Y"), [unguarded("A", "B")], all_factories(workers=2)
        )
        assert all(fires == [] for fires in results.values())


class TestTraceFiles:
    def test_parse_and_format_round_trip(self):
        text = [
            "# regression trace",
            "arrive PaymentRequested 7",
            "arrive Motion status=true room=bathroom ts=100",
            "arrive Shutdown",
        ]
        trace = parse_trace(text)
        assert trace[0] == Message("PaymentRequested", 7)
        assert trace[1] == Message(
            "Motion", {"status": True, "room": "bathroom", "ts": 100}
        )
        assert trace[2] == Message("Shutdown")

    def test_fire_log_format(self):
        fires = [Fire(0, (1, 2, 3)), Fire(2, (4,))]
        assert format_fire(fires[0]) == "fire 0 [1,2,3]"
        assert format_fire_log(fires) == "fire 0 [1,2,3]\nfire 2 [4]"
