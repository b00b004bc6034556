"""Producer/consumer bounded buffer coordinated through join patterns.

The buffer actor is seeded with one Free token per slot of capacity. A
Produce joins a Free to admit an item (re-emitted to self as an Item token,
with a SpaceAck back to the producer); a Consume joins an Item to deliver it
and return a Free. Token conservation bounds the in-flight items by the
capacity, and fair matching delivers items in production order.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from ..core import CONTINUE, JoinPattern, LookupEnv, Message, Stop, build_pattern, slot
from ..kernel import MatcherFactory
from ..runtime import Actor, ActorRef, CompletionHandle, SimpleActor

PRODUCE = "Produce"
CONSUME = "Consume"
FREE = "Free"
ITEM = "Item"
TERMINATE = "Terminate"
SPACE_ACK = "SpaceAck"
DELIVER = "Deliver"
KICK = "Kick"


@dataclass
class BufferStats:
    """Token accounting observed from the buffer actor's reactions."""

    items_now: int = 0
    max_items: int = 0
    admitted: int = 0
    delivered: int = 0
    delivered_order: list = field(default_factory=list)


def bounded_buffer_patterns(stats: BufferStats, *, record_order: bool = False) -> list[JoinPattern]:
    def admit(env: LookupEnv, self_ref):
        self_ref.send(Message(ITEM, env["item"]))
        stats.items_now += 1
        stats.admitted += 1
        if stats.items_now > stats.max_items:
            stats.max_items = stats.items_now
        env["reply"].send(Message(SPACE_ACK))
        return CONTINUE

    def deliver(env: LookupEnv, self_ref):
        stats.items_now -= 1
        stats.delivered += 1
        if record_order:
            stats.delivered_order.append(env["item"])
        env["sink"].send(Message(DELIVER, env["item"]))
        self_ref.send(Message(FREE))
        return CONTINUE

    produce_free = build_pattern(
        [slot(PRODUCE, "item", "reply"), slot(FREE)], None, admit
    )
    consume_item = build_pattern(
        [slot(CONSUME, "sink"), slot(ITEM, "item")], None, deliver
    )
    terminate = build_pattern([slot(TERMINATE)], None, lambda env, ref: Stop(stats))
    return [produce_free, consume_item, terminate]


def _producer(buffer_ref: ActorRef, items: int, serial: int):
    def handler(self_ref: ActorRef):
        sent = [0]

        def behavior(msg: Message):
            if msg.tag == KICK or msg.tag == SPACE_ACK:
                if sent[0] >= items:
                    return Stop(sent[0])
                value = (serial, sent[0])
                sent[0] += 1
                buffer_ref.send(Message(PRODUCE, (value, self_ref)))
            return None

        return behavior

    return handler


def _consumer(buffer_ref: ActorRef, items: int):
    def handler(self_ref: ActorRef):
        received: list = []

        def behavior(msg: Message):
            if msg.tag == KICK:
                buffer_ref.send(Message(CONSUME, self_ref))
            elif msg.tag == DELIVER:
                received.append(msg.payload)
                if len(received) >= items:
                    return Stop(received)
                buffer_ref.send(Message(CONSUME, self_ref))
            return None

        return behavior

    return handler


@dataclass
class BoundedBufferOutcome:
    elapsed_s: float
    stats: BufferStats
    produced: int
    delivered: int
    timed_out: bool


def run_bounded_buffer_once(
    buffer_size: int,
    producers: int,
    consumers: int,
    items: int,
    factory: MatcherFactory,
    *,
    timeout_s: float = 300.0,
    record_order: bool = False,
) -> BoundedBufferOutcome:
    """Drive one full producer/consumer session and collect token accounting.

    ``items`` is per producer; consumer demand is balanced to the same total.
    """
    total_items = producers * items
    per_consumer, remainder = divmod(total_items, consumers)
    stats = BufferStats()
    buffer = Actor(bounded_buffer_patterns(stats, record_order=record_order), factory)
    buffer_handle, buffer_ref = buffer.start()
    for _ in range(buffer_size):
        buffer_ref.send(Message(FREE))

    producer_actors = [
        SimpleActor(_producer(buffer_ref, items, serial)) for serial in range(producers)
    ]
    consumer_actors = [
        SimpleActor(_consumer(buffer_ref, per_consumer + (1 if i < remainder else 0)))
        for i in range(consumers)
    ]
    handles: list[CompletionHandle] = []
    refs: list[ActorRef] = []
    for actor in [*producer_actors, *consumer_actors]:
        handle, ref = actor.start()
        handles.append(handle)
        refs.append(ref)

    started = time.perf_counter()
    for ref in refs:
        ref.send(Message(KICK))

    timed_out = False
    deadline = started + timeout_s
    finished = started
    for handle in handles:
        remaining = deadline - time.perf_counter()
        try:
            handle.result(timeout=max(0.001, remaining))
        except TimeoutError:
            timed_out = True
            break
        finished = max(finished, handle.completed_at or finished)

    buffer_ref.send(Message(TERMINATE))
    try:
        buffer_handle.result(timeout=10.0)
    except TimeoutError:
        timed_out = True
    if timed_out:
        buffer.stop_now()
        for actor in [*producer_actors, *consumer_actors]:
            actor.stop_now()
    elapsed = finished - started
    return BoundedBufferOutcome(elapsed, stats, total_items, stats.delivered, timed_out)
