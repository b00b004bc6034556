"""Core model: messages, arrival stamping, join patterns, and the fairness order.

Every matching engine and the brute-force oracle share these types and the
single total order defined by :func:`fairness_key`, so a fairness decision can
never diverge between engines.
"""

from __future__ import annotations

from collections.abc import Callable, Hashable, Mapping, Sequence
from dataclasses import dataclass, replace
from typing import Any

LookupEnv = dict[str, Any]


class JoinError(Exception):
    """Base class for join-pattern construction and matching errors."""


class DuplicateBinding(JoinError):
    """Two slots of one pattern bind the same variable name."""


class InvalidFilter(JoinError):
    """A per-slot filter is attached to a slot whose tag repeats in the pattern."""


class EmptyPatternList(JoinError):
    """A matcher was instantiated without any patterns."""


class MissingMessage(JoinError):
    """An assignment references an arrival index absent from the buffer."""


@dataclass(frozen=True, slots=True)
class Message:
    """A tagged payload as handed to a mailbox; not yet stamped."""

    tag: Hashable
    payload: Any = None


@dataclass(frozen=True, slots=True)
class MessageInstance:
    """A payload stamped with its mailbox arrival position."""

    tag: Hashable
    payload: Any
    arrival_index: int


class ArrivalCounter:
    """Monotone counter handing out arrival indices in receipt order."""

    __slots__ = ("_next",)

    def __init__(self, start: int = 0) -> None:
        self._next = start

    def next_index(self) -> int:
        value = self._next
        self._next = value + 1
        return value


def stamp(message: Message, counter: ArrivalCounter) -> MessageInstance:
    """Stamp a tagged payload with the counter's current value, then advance it."""
    return MessageInstance(message.tag, message.payload, counter.next_index())


@dataclass(frozen=True, slots=True)
class Continue:
    """Keep the actor running after a fire."""


@dataclass(frozen=True, slots=True)
class Stop:
    """Stop the actor, completing its handle with ``value``."""

    value: Any = None


ResultControl = Continue | Stop
CONTINUE = Continue()


@dataclass(frozen=True, slots=True)
class Disconnected:
    """Outcome of waiting on a mailbox that was closed underneath the actor."""


DISCONNECTED = Disconnected()


@dataclass(frozen=True)
class SlotDescriptor:
    """One message position of a join pattern.

    ``binds`` lists the variable names this slot contributes to the lookup
    environment; ``extract`` maps a payload of ``expected_tag`` to the bound
    values, aligned with ``binds``. ``filter`` is an optional pure predicate
    over a single payload, used by the filtering engine to reject a message
    before it enters any matching tree.
    """

    expected_tag: Hashable
    binds: tuple[str, ...] = ()
    extract: Callable[[Any], Sequence[Any]] | None = None
    filter: Callable[[Any], bool] | None = None

    def bound_values(self, payload: Any) -> tuple[Any, ...]:
        if self.extract is not None:
            return tuple(self.extract(payload))
        if not self.binds:
            return ()
        if len(self.binds) == 1:
            return (payload,)
        if isinstance(payload, Mapping):
            return tuple(payload[name] for name in self.binds)
        return tuple(payload[i] for i in range(len(self.binds)))


def slot(
    tag: Hashable,
    *binds: str,
    extract: Callable[[Any], Sequence[Any]] | None = None,
    filter: Callable[[Any], bool] | None = None,
) -> SlotDescriptor:
    """Describe a slot expecting ``tag`` and binding ``binds``.

    Without ``extract``, a single name binds the whole payload; several names
    are pulled from a mapping payload by key, or from a sequence payload by
    position.
    """
    return SlotDescriptor(tag, tuple(binds), extract, filter)


@dataclass(frozen=True)
class JoinPattern:
    """A guarded multi-message pattern with its reaction.

    ``guard`` must be pure and safe to call from any thread; ``rhs`` may have
    effects and only ever runs on the owning actor's loop. ``pattern_index``
    is assigned by the matcher factory from declaration order.
    """

    slots: tuple[SlotDescriptor, ...]
    guard: Callable[[LookupEnv], bool]
    rhs: Callable[[LookupEnv, Any], ResultControl | None]
    size: int
    pattern_index: int = -1

    def with_index(self, index: int) -> "JoinPattern":
        return replace(self, pattern_index=index)


def index_patterns(patterns: Sequence[JoinPattern]) -> tuple[JoinPattern, ...]:
    """Assign pattern indices from list position (declaration order)."""
    return tuple(
        p if p.pattern_index == i else p.with_index(i) for i, p in enumerate(patterns)
    )


def _always_true(_env: LookupEnv) -> bool:
    return True


def _no_reaction(_env: LookupEnv, _self_ref: Any) -> ResultControl:
    return CONTINUE


def _check_filters(slots: Sequence[SlotDescriptor]) -> None:
    tag_counts: dict[Hashable, int] = {}
    for s in slots:
        tag_counts[s.expected_tag] = tag_counts.get(s.expected_tag, 0) + 1
    for s in slots:
        if s.filter is not None and tag_counts[s.expected_tag] > 1:
            raise InvalidFilter(
                f"filter on slot with tag {s.expected_tag!r}, which occurs "
                f"{tag_counts[s.expected_tag]} times in the pattern"
            )


def build_pattern(
    slots: Sequence[SlotDescriptor],
    guard: Callable[[LookupEnv], bool] | None = None,
    rhs: Callable[[LookupEnv, Any], ResultControl | None] | None = None,
) -> JoinPattern:
    """Assemble a join pattern, validating binding names and slot filters.

    Raises :class:`DuplicateBinding` when two slots bind the same name and
    :class:`InvalidFilter` when a filter sits on a slot whose tag is not
    unique within the pattern.
    """
    slots = tuple(slots)
    if not slots:
        raise EmptyPatternList("a pattern needs at least one slot")
    seen: set[str] = set()
    for s in slots:
        for name in s.binds:
            if name in seen:
                raise DuplicateBinding(f"binding {name!r} declared by more than one slot")
            seen.add(name)
    _check_filters(slots)
    return JoinPattern(
        slots=slots,
        guard=guard if guard is not None else _always_true,
        rhs=rhs if rhs is not None else _no_reaction,
        size=len(slots),
    )


def slot_fits(slot: SlotDescriptor, msg: MessageInstance) -> list[tuple[str, Any]] | None:
    """Bindings contributed by ``msg`` for ``slot``, or None on a tag mismatch."""
    if msg.tag != slot.expected_tag:
        return None
    return list(zip(slot.binds, slot.bound_values(msg.payload)))


def assemble_env(
    pattern: JoinPattern,
    assignment: Sequence[int],
    buffer: Mapping[int, MessageInstance],
) -> LookupEnv:
    """Build the guard/rhs environment for a complete slot assignment.

    ``assignment`` lists one arrival index per slot, in slot order.
    """
    env: LookupEnv = {}
    for s, index in zip(pattern.slots, assignment):
        msg = buffer.get(index)
        if msg is None:
            raise MissingMessage(f"arrival index {index} not in buffer")
        names = s.binds
        if names:
            for name, value in zip(names, s.bound_values(msg.payload)):
                env[name] = value
    return env


@dataclass(frozen=True, slots=True)
class CandidateMatch:
    """A complete, tag-consistent assignment of buffered messages to one pattern.

    ``key`` is the consumed arrival indices sorted ascending; it is the primary
    component of the fairness order.
    """

    pattern_index: int
    slot_tuple: tuple[int, ...]
    key: tuple[int, ...]

    @property
    def assignment(self) -> dict[int, int]:
        return dict(enumerate(self.slot_tuple))


def candidate(pattern_index: int, slot_tuple: Sequence[int]) -> CandidateMatch:
    st = tuple(slot_tuple)
    return CandidateMatch(pattern_index, st, tuple(sorted(st)))


def fairness_key(match: CandidateMatch) -> tuple[tuple[int, ...], int, tuple[int, ...]]:
    """Sort key realizing fair matching: oldest consumed messages first.

    Ascending-lexicographic comparison of the sorted index key, then
    declaration order, then the slot tuple.
    """
    return (match.key, match.pattern_index, match.slot_tuple)


def compare_matches(a: CandidateMatch, b: CandidateMatch) -> int:
    """Total order over candidates; negative means ``a`` is fairer."""
    ka, kb = fairness_key(a), fairness_key(b)
    if ka < kb:
        return -1
    if ka > kb:
        return 1
    return 0
