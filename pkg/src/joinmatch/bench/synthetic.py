"""Synthetic single-pattern workloads: clean traffic and two noise regimes."""

from __future__ import annotations

import random
from collections.abc import Callable

from ..core import CONTINUE, JoinPattern, LookupEnv, Message, Stop, build_pattern, slot

SLOT_TAGS = ("A", "B", "C", "D", "E")
UNMATCHABLE_TAG = "Z"
DEFAULT_NOISE_PER_GROUP = 20
WORKLOADS = ("clean", "noise-tag", "noise-payload")


def _equality_guard(names: tuple[str, ...]) -> Callable[[LookupEnv], bool]:
    def guard(env: LookupEnv) -> bool:
        first = env[names[0]]
        for name in names[1:]:
            if env[name] != first:
                return False
        return True

    return guard


def synthetic_patterns(
    size: int,
    guarded: bool,
    *,
    fire_target: int | None = None,
    fire_log: list | None = None,
) -> list[JoinPattern]:
    """One pattern over tags A..E[:size]; the guarded variant requires equal payloads.

    With ``fire_target`` the reaction counts fires into ``fire_log`` and stops
    the actor at the target.
    """
    if not 1 <= size <= len(SLOT_TAGS):
        raise ValueError(f"pattern size must be 1..{len(SLOT_TAGS)}")
    names = tuple(f"x{i}" for i in range(size))
    slots = [slot(SLOT_TAGS[i], names[i]) for i in range(size)]
    guard = _equality_guard(names) if guarded else None

    counter = fire_log if fire_log is not None else []

    def rhs(env: LookupEnv, _self_ref):
        counter.append(env[names[0]])
        if fire_target is not None and len(counter) >= fire_target:
            return Stop(len(counter))
        return CONTINUE

    return [build_pattern(slots, guard, rhs)]


def gen_synthetic_traffic(
    size: int,
    workload: str,
    matches: int,
    seed: int,
    *,
    noise_per_group: int = DEFAULT_NOISE_PER_GROUP,
) -> list[Message]:
    """Messages guaranteeing ``matches`` fires of the size-``size`` pattern.

    Each group carries one message per slot tag with equal payloads, shuffled
    within its window. ``noise-tag`` adds messages no slot accepts;
    ``noise-payload`` adds correct-tag messages with unique payloads that can
    never satisfy the equality guard.
    """
    if workload not in WORKLOADS:
        raise ValueError(f"unknown workload {workload!r}")
    rng = random.Random(seed)
    tags = SLOT_TAGS[:size]
    out: list[Message] = []
    noise_serial = 0
    for group in range(matches):
        window = [Message(tag, group) for tag in tags]
        if workload == "noise-tag":
            for _ in range(noise_per_group):
                noise_serial += 1
                window.append(Message(UNMATCHABLE_TAG, -noise_serial))
        elif workload == "noise-payload":
            for _ in range(noise_per_group):
                noise_serial += 1
                window.append(Message(rng.choice(tags), -noise_serial))
        rng.shuffle(window)
        out.extend(window)
    return out
