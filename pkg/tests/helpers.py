"""Shared test utilities: pattern builders, replay drivers, tree audits."""

from __future__ import annotations

import random

from joinmatch import (
    ArrivalCounter,
    JoinPattern,
    Message,
    MessageInstance,
    build_pattern,
    slot,
    stamp,
)
from joinmatch.tree import MatchingTree


def unguarded(*tags: str) -> JoinPattern:
    return build_pattern([slot(tag) for tag in tags])


def guarded(tags: tuple[str, ...], guard) -> JoinPattern:
    slots = [slot(tag, f"x{i}") for i, tag in enumerate(tags)]
    return build_pattern(slots, guard)


def stamp_all(messages, start: int = 0) -> dict[int, MessageInstance]:
    """Stamp a message list into an ordered buffer, like an engine would see it."""
    counter = ArrivalCounter(start)
    buffer = {}
    for m in messages:
        inst = stamp(m, counter)
        buffer[inst.arrival_index] = inst
    return buffer


def msgs(*tagged) -> list[Message]:
    """Build messages from 'Tag' strings or ('Tag', payload) pairs."""
    out = []
    for item in tagged:
        if isinstance(item, tuple):
            out.append(Message(item[0], item[1]))
        else:
            out.append(Message(item))
    return out


def audit_tree(tree: MatchingTree, pattern: JoinPattern, buffer) -> None:
    """Structural soundness: every node spans live, tag-consistent messages."""
    assert () in tree.nodes, "root must always be present"
    for key, assignments in tree.nodes.items():
        assert tuple(sorted(set(key))) == key, f"key {key} not sorted/unique"
        for index in key:
            assert index in buffer, f"node {key} references consumed index {index}"
        assert assignments, f"node {key} has no assignments"
        for assignment in assignments:
            filled = [i for i in assignment if i is not None]
            assert sorted(filled) == list(key), (
                f"assignment {assignment} does not span node key {key}"
            )
            assert len(set(filled)) == len(filled), f"assignment {assignment} not injective"
            for position, index in enumerate(assignment):
                if index is None:
                    continue
                expected = pattern.slots[position].expected_tag
                actual = buffer[index].tag
                assert actual == expected, (
                    f"slot {position} expects {expected}, assignment {assignment} "
                    f"holds a {actual} message"
                )
    for key in tree.complete_keys:
        assert key in tree.nodes and len(key) == tree.size


def random_candidates(rng: random.Random, count: int):
    """Random CandidateMatch values for order-property tests."""
    from joinmatch import candidate

    out = []
    for _ in range(count):
        size = rng.randint(1, 4)
        indices = rng.sample(range(12), size)
        out.append(candidate(rng.randrange(3), tuple(indices)))
    return out
