"""Ping-pong and chameneos micro-benchmarks in two flavours.

Each benchmark exists as a SimpleActor version (plain one-message dispatch)
and a join-actor version using unary patterns only, so the pair isolates the
overhead of routing single messages through a matching engine.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

from ..core import CONTINUE, Message, Stop, build_pattern, slot
from ..kernel import MatcherFactory
from ..runtime import Actor, ActorRef, SimpleActor

PING = "Ping"
PONG = "Pong"
DONE = "Done"
MEET = "Meet"
MEETING = "Meeting"
EXIT = "Exit"
START = "Start"

CHAMENEOS_COLORS = ("blue", "red", "yellow")


@dataclass
class MicroOutcome:
    elapsed_s: float
    completed: int
    timed_out: bool


class _LateRef:
    """Forwarding reference set after the peer actor exists."""

    def __init__(self) -> None:
        self.target: ActorRef | None = None

    def send(self, message: Message) -> None:
        self.target.send(message)


def _run_pair(kick_target: ActorRef, handles, timeout_s: float) -> MicroOutcome:
    started = time.perf_counter()
    kick_target.send(Message(START))
    timed_out = False
    finished = started
    completed = 0
    for handle in handles:
        try:
            completed = handle.result(timeout=timeout_s) or completed
            finished = max(finished, handle.completed_at or finished)
        except TimeoutError:
            timed_out = True
            break
    return MicroOutcome(finished - started, completed, timed_out)


def run_ping_pong(
    n: int,
    mode: str,
    factory: MatcherFactory | None = None,
    *,
    timeout_s: float = 300.0,
) -> MicroOutcome:
    """Two actors exchange ``n`` round trips; returns completed exchange count."""
    ponger_late = _LateRef()

    if mode == "simple-actor":
        def ponger_handler(self_ref: ActorRef):
            def behavior(msg: Message):
                if msg.tag == PING:
                    msg.payload.send(Message(PONG, self_ref))
                elif msg.tag == DONE:
                    return Stop(n)
                return None

            return behavior

        def pinger_handler(self_ref: ActorRef):
            count = [0]

            def behavior(msg: Message):
                if msg.tag == START:
                    ponger_late.send(Message(PING, self_ref))
                elif msg.tag == PONG:
                    count[0] += 1
                    if count[0] >= n:
                        ponger_late.send(Message(DONE))
                        return Stop(count[0])
                    ponger_late.send(Message(PING, self_ref))
                return None

            return behavior

        ponger = SimpleActor(ponger_handler, name="ponger")
        pinger = SimpleActor(pinger_handler, name="pinger")
    else:
        if factory is None:
            raise ValueError("join-actor mode needs a matcher factory")

        def ponger_patterns():
            def on_ping(env, self_ref):
                env["sender"].send(Message(PONG, self_ref))
                return CONTINUE

            return [
                build_pattern([slot(PING, "sender")], None, on_ping),
                build_pattern([slot(DONE)], None, lambda env, ref: Stop(n)),
            ]

        def pinger_patterns():
            count = [0]

            def on_start(env, self_ref):
                ponger_late.send(Message(PING, self_ref))
                return CONTINUE

            def on_pong(env, self_ref):
                count[0] += 1
                if count[0] >= n:
                    ponger_late.send(Message(DONE))
                    return Stop(count[0])
                ponger_late.send(Message(PING, self_ref))
                return CONTINUE

            return [
                build_pattern([slot(START)], None, on_start),
                build_pattern([slot(PONG, "from")], None, on_pong),
            ]

        ponger = Actor(ponger_patterns(), factory, name="ponger")
        pinger = Actor(pinger_patterns(), factory, name="pinger")

    ponger_handle, ponger_ref = ponger.start()
    pinger_handle, pinger_ref = pinger.start()
    ponger_late.target = ponger_ref
    outcome = _run_pair(pinger_ref, [pinger_handle, ponger_handle], timeout_s)
    if outcome.timed_out:
        ponger.stop_now()
        pinger.stop_now()
    return outcome


def _broker_logic(n_meetings: int, population: int):
    """Shared broker state machine: pair requests, then send everyone home."""
    state = {"waiting": None, "meetings": 0, "exited": 0}

    def on_meet(color: str, ref: ActorRef, self_ref: ActorRef):
        if state["meetings"] >= n_meetings:
            if state["waiting"] is not None:
                _, parked = state["waiting"]
                state["waiting"] = None
                parked.send(Message(EXIT))
                state["exited"] += 1
            ref.send(Message(EXIT))
            state["exited"] += 1
            if state["exited"] >= population:
                return Stop(state["meetings"])
            return CONTINUE
        if state["waiting"] is None:
            state["waiting"] = (color, ref)
            return CONTINUE
        other_color, other_ref = state["waiting"]
        state["waiting"] = None
        state["meetings"] += 1
        other_ref.send(Message(MEETING, color))
        ref.send(Message(MEETING, other_color))
        return CONTINUE

    return on_meet, state


def _complement(own: str, other: str) -> str:
    if own == other:
        return own
    for color in CHAMENEOS_COLORS:
        if color != own and color != other:
            return color
    return own


def run_chameneos(
    n_meetings: int,
    mode: str,
    factory: MatcherFactory | None = None,
    *,
    population: int = 5,
    timeout_s: float = 300.0,
) -> MicroOutcome:
    """A broker pairs ``n_meetings`` meetings among ``population`` chameneos."""
    broker_late = _LateRef()
    on_meet, state = _broker_logic(n_meetings, population)

    def creature_behavior(self_ref: ActorRef, color_cell: list):
        def behavior(msg: Message):
            if msg.tag == START:
                broker_late.send(Message(MEET, (color_cell[0], self_ref)))
            elif msg.tag == MEETING:
                color_cell[0] = _complement(color_cell[0], msg.payload)
                broker_late.send(Message(MEET, (color_cell[0], self_ref)))
            elif msg.tag == EXIT:
                return Stop(None)
            return None

        return behavior

    if mode == "simple-actor":
        def broker_handler(self_ref: ActorRef):
            def behavior(msg: Message):
                if msg.tag == MEET:
                    color, ref = msg.payload
                    return on_meet(color, ref, self_ref)
                return None

            return behavior

        broker = SimpleActor(broker_handler, name="broker")
        creatures = [
            SimpleActor(
                lambda self_ref, cell=[CHAMENEOS_COLORS[i % 3]]: creature_behavior(self_ref, cell),
                name=f"chameneos-{i}",
            )
            for i in range(population)
        ]
    else:
        if factory is None:
            raise ValueError("join-actor mode needs a matcher factory")

        def broker_patterns():
            def rhs(env, self_ref):
                color, ref = env["request"]
                return on_meet(color, ref, self_ref)

            return [build_pattern([slot(MEET, "request")], None, rhs)]

        def creature_patterns(index: int):
            cell = [CHAMENEOS_COLORS[index % 3]]

            def on_start(env, self_ref):
                broker_late.send(Message(MEET, (cell[0], self_ref)))
                return CONTINUE

            def on_meeting(env, self_ref):
                cell[0] = _complement(cell[0], env["other"])
                broker_late.send(Message(MEET, (cell[0], self_ref)))
                return CONTINUE

            return [
                build_pattern([slot(START)], None, on_start),
                build_pattern([slot(MEETING, "other")], None, on_meeting),
                build_pattern([slot(EXIT)], None, lambda env, ref: Stop(None)),
            ]

        broker = Actor(broker_patterns(), factory, name="broker")
        creatures = [
            Actor(creature_patterns(i), factory, name=f"chameneos-{i}")
            for i in range(population)
        ]

    broker_handle, broker_ref = broker.start()
    broker_late.target = broker_ref
    creature_handles = []
    creature_refs = []
    for creature in creatures:
        handle, ref = creature.start()
        creature_handles.append(handle)
        creature_refs.append(ref)

    started = time.perf_counter()
    for ref in creature_refs:
        ref.send(Message(START))
    timed_out = False
    finished = started
    try:
        meetings = broker_handle.result(timeout=timeout_s)
        finished = broker_handle.completed_at or finished
        for handle in creature_handles:
            handle.result(timeout=timeout_s)
            finished = max(finished, handle.completed_at or finished)
    except TimeoutError:
        timed_out = True
        meetings = state["meetings"]
        broker.stop_now()
        for creature in creatures:
            creature.stop_now()
    return MicroOutcome(finished - started, meetings, timed_out)
