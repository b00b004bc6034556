"""Brute-force matching oracle: the reference semantics for every engine.

Stateless enumeration of all candidate matches over a message buffer. This is
intentionally exponential; it exists to define correct behaviour and to serve
as the ground truth in differential replays, not to be fast.
"""

from __future__ import annotations

import itertools
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from typing import Any

from .core import (
    ArrivalCounter,
    CandidateMatch,
    JoinPattern,
    Message,
    MessageInstance,
    assemble_env,
    candidate,
    fairness_key,
    index_patterns,
    stamp,
)

# Ordered map arrival_index -> MessageInstance; insertion happens in stamping
# order, so plain dict iteration yields ascending indices.
MessageBuffer = dict[int, MessageInstance]


@dataclass(frozen=True, slots=True)
class Arrive:
    message: MessageInstance


@dataclass(frozen=True, slots=True)
class Fire:
    pattern_index: int
    key: tuple[int, ...]


TraceEvent = Arrive | Fire


def _pattern_candidates(
    buffer: Mapping[int, MessageInstance], pattern: JoinPattern
) -> Iterable[CandidateMatch]:
    """All injective, tag-consistent complete assignments for one pattern."""
    per_slot: list[list[int]] = []
    for s in pattern.slots:
        fits = [i for i, m in buffer.items() if m.tag == s.expected_tag]
        if not fits:
            return
        per_slot.append(fits)
    for combo in itertools.product(*per_slot):
        if len(set(combo)) != len(combo):
            continue
        yield candidate(pattern.pattern_index, combo)


def enumerate_matches(
    buffer: Mapping[int, MessageInstance], patterns: Sequence[JoinPattern]
) -> list[CandidateMatch]:
    """Every guard-true candidate over the buffer, sorted fairest first."""
    out: list[CandidateMatch] = []
    for pattern in index_patterns(patterns):
        for cand in _pattern_candidates(buffer, pattern):
            env = assemble_env(pattern, cand.slot_tuple, buffer)
            if pattern.guard(env):
                out.append(cand)
    out.sort(key=fairness_key)
    return out


def fairest_match(
    buffer: Mapping[int, MessageInstance], patterns: Sequence[JoinPattern]
) -> CandidateMatch | None:
    """The fairness-minimum of :func:`enumerate_matches`, or None."""
    best: CandidateMatch | None = None
    best_key = None
    for pattern in index_patterns(patterns):
        for cand in _pattern_candidates(buffer, pattern):
            k = fairness_key(cand)
            if best_key is not None and k >= best_key:
                continue
            env = assemble_env(pattern, cand.slot_tuple, buffer)
            if pattern.guard(env):
                best, best_key = cand, k
    return best


class _TraceSelfRef:
    """Self reference used while replaying reactions: sends append to the trace."""

    __slots__ = ("_pending",)

    def __init__(self, pending: list[Message]) -> None:
        self._pending = pending

    def send(self, message: Message) -> None:
        self._pending.append(message)


def oracle_fire_sequence(
    trace: Iterable[Message],
    patterns: Sequence[JoinPattern],
    *,
    run_rhs: bool = False,
    counter_start: int = 0,
    max_fires: int | None = None,
) -> list[Fire]:
    """Replay a message trace under the reference semantics.

    After each arrival the fairest match is fired and consumed, repeatedly,
    until none remains. With ``run_rhs`` the pattern reactions execute against
    a self reference whose sends are appended to the trace, stamped after all
    messages already stamped.
    """
    patterns = index_patterns(patterns)
    counter = ArrivalCounter(counter_start)
    buffer: MessageBuffer = {}
    pending = list(trace)
    fires: list[Fire] = []
    self_ref = _TraceSelfRef(pending)
    cursor = 0
    while cursor < len(pending):
        inst = stamp(pending[cursor], counter)
        cursor += 1
        buffer[inst.arrival_index] = inst
        while True:
            best = fairest_match(buffer, patterns)
            if best is None:
                break
            fires.append(Fire(best.pattern_index, best.key))
            pattern = patterns[best.pattern_index]
            env = assemble_env(pattern, best.slot_tuple, buffer)
            for idx in best.key:
                del buffer[idx]
            if run_rhs:
                pattern.rhs(env, self_ref)
            if max_fires is not None and len(fires) >= max_fires:
                return fires
    return fires


def differential_replay(
    trace: Sequence[Message],
    patterns: Sequence[JoinPattern],
    matcher_factories: Sequence[Any],
    *,
    counter_start: int = 0,
) -> dict[str, list[Fire]]:
    """Fire sequences of every factory's engine and of the oracle, keyed by name.

    Each factory gets a fresh matcher; stamping starts from ``counter_start``
    everywhere, so keys are comparable across engines. The oracle's sequence is
    stored under ``"oracle"``. This only reports; the caller decides whether a
    mismatch is an error.
    """
    from .kernel import factory_instantiate, replay_fire_sequence

    results: dict[str, list[Fire]] = {
        "oracle": oracle_fire_sequence(trace, patterns, counter_start=counter_start)
    }
    for f in matcher_factories:
        matcher = factory_instantiate(f, patterns, counter_start=counter_start)
        try:
            results[f.identifier] = replay_fire_sequence(matcher, trace)
        finally:
            matcher.close()
    return results


def _parse_value(text: str) -> Any:
    if text == "true":
        return True
    if text == "false":
        return False
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def parse_trace(lines: Iterable[str]) -> list[Message]:
    """Parse ``arrive <tag> <field=value ...>`` lines into messages.

    A record with no fields carries a None payload; a single bare value (no
    ``=``) becomes the payload itself; named fields become a dict payload.
    """
    messages: list[Message] = []
    for raw in lines:
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] != "arrive":
            raise ValueError(f"unrecognized trace record: {line!r}")
        tag = parts[1]
        fields = parts[2:]
        if not fields:
            messages.append(Message(tag))
        elif len(fields) == 1 and "=" not in fields[0]:
            messages.append(Message(tag, _parse_value(fields[0])))
        else:
            payload: dict[str, Any] = {}
            for item in fields:
                name, _, value = item.partition("=")
                payload[name] = _parse_value(value)
            messages.append(Message(tag, payload))
    return messages


def format_fire(fire: Fire) -> str:
    return f"fire {fire.pattern_index} [{','.join(str(i) for i in fire.key)}]"


def format_fire_log(fires: Iterable[Fire]) -> str:
    return "\n".join(format_fire(f) for f in fires)
