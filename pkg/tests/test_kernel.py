"""Matcher contract, the factory registry, and the brute-force engine."""

from __future__ import annotations

import pytest

from joinmatch import (
    CONTINUE,
    DISCONNECTED,
    ArrivalCounter,
    Continue,
    EmptyPatternList,
    FACTORY_IDENTIFIERS,
    Mailbox,
    MatchProbe,
    Message,
    Stop,
    all_factories,
    brute_force_ingest,
    build_pattern,
    factory_instantiate,
    matcher_factory,
    replay_fire_sequence,
    slot,
    stamp,
)
from joinmatch.oracle import Fire

from helpers import msgs, unguarded


def payment_patterns(events: list):
    def fire(env, self_ref):
        events.append(env["id1"])
        return CONTINUE

    request = build_pattern(
        [
            slot("PaymentRequested", "id1"),
            slot("MerchantValidated", "id2"),
            slot("CustomerValidated", "id3"),
        ],
        lambda env: env["id1"] == env["id2"] == env["id3"],
        fire,
    )
    shutdown = build_pattern([slot("Shutdown")], None, lambda env, ref: Stop("done"))
    return [request, shutdown]


class TestFactories:
    def test_all_five_factories_instantiate_the_same_patterns(self):
        patterns = [unguarded("A", "B"), unguarded("C")]
        for factory in all_factories(workers=2):
            with factory_instantiate(factory, patterns) as matcher:
                assert matcher.identifier == factory.identifier
                assert [p.pattern_index for p in matcher.patterns] == [0, 1]
        assert tuple(f.identifier for f in all_factories()) == FACTORY_IDENTIFIERS

    def test_instances_have_independent_state(self):
        factory = matcher_factory("brute-force")
        patterns = [unguarded("A", "B")]
        first = factory_instantiate(factory, patterns)
        second = factory_instantiate(factory, patterns)
        assert first.feed(Message("A")) is None
        assert second.feed(Message("B")) is None
        # Only the matcher that saw both halves fires.
        assert first.feed(Message("B")) is not None
        assert second.poll() is None

    def test_empty_pattern_list_rejected(self):
        with pytest.raises(EmptyPatternList):
            factory_instantiate(matcher_factory("while-lazy"), [])

    def test_unknown_identifier_rejected(self):
        with pytest.raises(KeyError):
            matcher_factory("magic")


class TestRunUntilFire:
    @pytest.mark.parametrize("order", [
        ("PaymentRequested", "MerchantValidated", "CustomerValidated"),
        ("CustomerValidated", "PaymentRequested", "MerchantValidated"),
        ("MerchantValidated", "CustomerValidated", "PaymentRequested"),
    ])
    def test_payment_fires_in_any_arrival_order(self, order):
        events: list = []
        matcher = factory_instantiate(matcher_factory("brute-force"), payment_patterns(events))
        mailbox = Mailbox()
        for tag in order:
            mailbox.send(Message(tag, 1))
        result = matcher.run_until_fire(mailbox, None)
        assert isinstance(result, Continue)
        assert events == [1]

    def test_shutdown_fires_immediately_and_stops(self):
        events: list = []
        matcher = factory_instantiate(matcher_factory("stateful-tree"), payment_patterns(events))
        mailbox = Mailbox()
        mailbox.send(Message("Shutdown"))
        result = matcher.run_until_fire(mailbox, None)
        assert result == Stop("done")
        assert events == []

    def test_second_invocation_drains_without_new_sends(self):
        # Mailbox already holds material for two disjoint fires; each
        # invocation produces exactly one.
        matcher = factory_instantiate(matcher_factory("while-lazy"), [unguarded("A", "B")])
        mailbox = Mailbox()
        for tag in ("A", "B", "A", "B"):
            mailbox.send(Message(tag))
        assert isinstance(matcher.run_until_fire(mailbox, None), Continue)
        assert isinstance(matcher.run_until_fire(mailbox, None), Continue)
        assert len(mailbox) == 0

    def test_closed_mailbox_reports_disconnected(self):
        matcher = factory_instantiate(matcher_factory("brute-force"), [unguarded("A")])
        mailbox = Mailbox()
        mailbox.close()
        assert matcher.run_until_fire(mailbox, None) is DISCONNECTED

    def test_rhs_failure_propagates(self):
        def broken(env, ref):
            raise RuntimeError("boom")

        pattern = build_pattern([slot("A")], None, broken)
        matcher = factory_instantiate(matcher_factory("brute-force"), [pattern])
        mailbox = Mailbox()
        mailbox.send(Message("A"))
        with pytest.raises(RuntimeError, match="boom"):
            matcher.run_until_fire(mailbox, None)


class TestBruteForceIngest:
    def test_waits_until_enough_messages(self):
        pattern = unguarded("A", "B", "C").with_index(0)
        buffer: dict = {}
        counter = ArrivalCounter()
        assert brute_force_ingest(buffer, stamp(Message("A"), counter), [pattern]) is None
        assert brute_force_ingest(buffer, stamp(Message("B"), counter), [pattern]) is None
        assert len(buffer) == 2

    def test_figure_trace_matches_after_third_arrival(self):
        pattern = unguarded("A", "B", "C").with_index(0)
        buffer: dict = {}
        counter = ArrivalCounter(start=1)
        for tag in ("A", "C"):
            assert brute_force_ingest(buffer, stamp(Message(tag), counter), [pattern]) is None
        best = brute_force_ingest(buffer, stamp(Message("B"), counter), [pattern])
        assert best is not None and best.key == (1, 2, 3)

    def test_nonmatching_combinations_are_reenumerated(self):
        # The stateless engine re-evaluates old combinations on every arrival.
        pattern = build_pattern(
            [slot("A", "x"), slot("B", "y")], lambda env: env["x"] == env["y"]
        ).with_index(0)
        probe = MatchProbe()
        buffer: dict = {}
        counter = ArrivalCounter()
        brute_force_ingest(buffer, stamp(Message("A", 1), counter), [pattern], probe)
        brute_force_ingest(buffer, stamp(Message("B", 2), counter), [pattern], probe)
        brute_force_ingest(buffer, stamp(Message("B", 3), counter), [pattern], probe)
        assert probe.guard_evals[(0, (0, 1))] == 2  # first pair retried


class TestReplay:
    def test_fire_log_collection(self):
        matcher = factory_instantiate(matcher_factory("brute-force"), [unguarded("A", "B")])
        fires = replay_fire_sequence(matcher, msgs("A", "X", "B", "A", "B"))
        assert fires == [Fire(0, (0, 2)), Fire(0, (3, 4))]

    def test_rhs_self_send_during_replay(self):
        def rhs(env, self_ref):
            if env["x"] == 0:
                self_ref.send(Message("A", 1))
            return None

        pattern = build_pattern([slot("A", "x")], None, rhs)
        matcher = factory_instantiate(matcher_factory("while-lazy"), [pattern])
        fires = replay_fire_sequence(matcher, [Message("A", 0)], run_rhs=True)
        assert [f.key for f in fires] == [(0,), (1,)]
