"""Smart house monitor workload: overlapping guarded patterns over device events.

Three reaction rules share message types: a bathroom-lighting rule over
Motion/AmbientLight/Light and two presence rules over Motion/Contact/Motion,
plus a unary shut-off. Guards check room names, device statuses, an ambient
value ceiling, and that event timestamps are non-decreasing in slot order.
Room and status checks that depend on a single uniquely-tagged slot double as
per-slot filters for the filtering engine.
"""

from __future__ import annotations

import random
from typing import Any

from ..core import CONTINUE, JoinPattern, LookupEnv, Message, Stop, build_pattern, slot

MOTION = "Motion"
AMBIENT_LIGHT = "AmbientLight"
LIGHT = "Light"
CONTACT = "Contact"
SHUT_OFF = "ShutOff"

ROOMS = (
    "bathroom",
    "front_door",
    "entrance_hall",
    "kitchen",
    "bedroom",
    "living_room",
    "garage",
    "gate_door",
)

BATHROOM = "bathroom"
FRONT_DOOR = "front_door"
ENTRANCE_HALL = "entrance_hall"
AMBIENT_CEILING = 40

NOISE_LEVELS = (0, 4, 8, 12, 16, 20, 24)

E1_LIGHTING = 0
E5_ARRIVE = 1
E5_LEAVE = 2
SHUTOFF_PATTERN = 3


def _event(payload: dict[str, Any]) -> tuple[Any, Any, Any]:
    return (payload["status"], payload["room"], payload["ts"])


def _ambient(payload: dict[str, Any]) -> tuple[Any, Any, Any]:
    return (payload["value"], payload["room"], payload["ts"])


def _sorted_times(*times: int) -> bool:
    return all(a <= b for a, b in zip(times, times[1:]))


def _bathroom_occupied(env: LookupEnv) -> bool:
    return (
        _sorted_times(env["t0"], env["t1"], env["t2"])
        and env["mRoom"] == BATHROOM
        and env["lRoom"] == BATHROOM
        and env["alRoom"] == BATHROOM
        and env["mStatus"]
        and not env["lStatus"]
        and env["value"] <= AMBIENT_CEILING
    )


def _occupied_home(env: LookupEnv) -> bool:
    return (
        _sorted_times(env["t0"], env["t1"], env["t2"])
        and env["mStatus0"]
        and env["mStatus1"]
        and env["cStatus"]
        and env["mRoom0"] == FRONT_DOOR
        and env["cRoom"] == FRONT_DOOR
        and env["mRoom1"] == ENTRANCE_HALL
    )


def _empty_home(env: LookupEnv) -> bool:
    return (
        _sorted_times(env["t0"], env["t1"], env["t2"])
        and env["mStatus0"]
        and env["mStatus1"]
        and env["cStatus"]
        and env["mRoom0"] == ENTRANCE_HALL
        and env["cRoom"] == FRONT_DOOR
        and env["mRoom1"] == FRONT_DOOR
    )


def smart_house_patterns(
    *,
    fire_target: int | None = None,
    fire_log: list | None = None,
    use_filters: bool = True,
) -> list[JoinPattern]:
    """The monitor's pattern list, in declaration order.

    The filters mirror the single-slot conjuncts of each guard; the two
    presence rules can only filter their Contact slot because Motion occurs
    twice in them.
    """
    counter = fire_log if fire_log is not None else []

    def reaction(label: str):
        def rhs(_env: LookupEnv, _self_ref):
            counter.append(label)
            if fire_target is not None and len(counter) >= fire_target:
                return Stop(len(counter))
            return CONTINUE

        return rhs

    f_motion = (lambda p: p["status"] and p["room"] == BATHROOM) if use_filters else None
    f_ambient = (
        (lambda p: p["room"] == BATHROOM and p["value"] <= AMBIENT_CEILING)
        if use_filters
        else None
    )
    f_light = (lambda p: (not p["status"]) and p["room"] == BATHROOM) if use_filters else None
    f_contact = (lambda p: p["status"] and p["room"] == FRONT_DOOR) if use_filters else None

    lighting = build_pattern(
        [
            slot(MOTION, "mStatus", "mRoom", "t0", extract=_event, filter=f_motion),
            slot(AMBIENT_LIGHT, "value", "alRoom", "t1", extract=_ambient, filter=f_ambient),
            slot(LIGHT, "lStatus", "lRoom", "t2", extract=_event, filter=f_light),
        ],
        _bathroom_occupied,
        reaction("lighting"),
    )
    arrive = build_pattern(
        [
            slot(MOTION, "mStatus0", "mRoom0", "t0", extract=_event),
            slot(CONTACT, "cStatus", "cRoom", "t1", extract=_event, filter=f_contact),
            slot(MOTION, "mStatus1", "mRoom1", "t2", extract=_event),
        ],
        _occupied_home,
        reaction("arrive"),
    )
    leave = build_pattern(
        [
            slot(MOTION, "mStatus0", "mRoom0", "t0", extract=_event),
            slot(CONTACT, "cStatus", "cRoom", "t1", extract=_event, filter=f_contact),
            slot(MOTION, "mStatus1", "mRoom1", "t2", extract=_event),
        ],
        _empty_home,
        reaction("leave"),
    )
    shut_off = build_pattern([slot(SHUT_OFF)], None, lambda env, ref: Stop(len(counter)))
    return [lighting, arrive, leave, shut_off]


def _motion(ts: int, room: str, status: bool = True, ident: int = 0) -> Message:
    return Message(MOTION, {"id": ident, "status": status, "room": room, "ts": ts})


def _ambient_light(ts: int, room: str, value: int, ident: int = 0) -> Message:
    return Message(AMBIENT_LIGHT, {"id": ident, "value": value, "room": room, "ts": ts})


def _light(ts: int, room: str, status: bool = False, ident: int = 0) -> Message:
    return Message(LIGHT, {"id": ident, "status": status, "room": room, "ts": ts})


def _contact(ts: int, room: str, status: bool = True, ident: int = 0) -> Message:
    return Message(CONTACT, {"id": ident, "status": status, "room": room, "ts": ts})


def gen_smart_house_traffic(matches: int, noise_per_match: int, seed: int) -> list[Message]:
    """Matchable triples cycling through the three rules, plus random noise.

    Triples carry ascending millisecond timestamps and the exact rooms their
    rule expects; noise events carry random tags, rooms, statuses, and values,
    shuffled uniformly into each triple's window under the run seed.
    """
    rng = random.Random(seed)
    out: list[Message] = []
    ts = 1_000_000
    ident = 0
    for group in range(matches):
        kind = group % 3
        triple: list[Message]
        if kind == 0:
            triple = [
                _motion(ts, BATHROOM, True, ident),
                _ambient_light(ts + 1, BATHROOM, rng.randrange(AMBIENT_CEILING + 1), ident + 1),
                _light(ts + 2, BATHROOM, False, ident + 2),
            ]
        elif kind == 1:
            triple = [
                _motion(ts, FRONT_DOOR, True, ident),
                _contact(ts + 1, FRONT_DOOR, True, ident + 1),
                _motion(ts + 2, ENTRANCE_HALL, True, ident + 2),
            ]
        else:
            triple = [
                _motion(ts, ENTRANCE_HALL, True, ident),
                _contact(ts + 1, FRONT_DOOR, True, ident + 1),
                _motion(ts + 2, FRONT_DOOR, True, ident + 2),
            ]
        ts += 3
        ident += 3
        window = list(triple)
        for _ in range(noise_per_match):
            tag = rng.choice((MOTION, AMBIENT_LIGHT, LIGHT, CONTACT))
            room = rng.choice(ROOMS)
            if tag == AMBIENT_LIGHT:
                window.append(_ambient_light(ts, room, rng.randrange(101), ident))
            elif tag == MOTION:
                window.append(_motion(ts, room, rng.random() < 0.5, ident))
            elif tag == LIGHT:
                window.append(_light(ts, room, rng.random() < 0.5, ident))
            else:
                window.append(_contact(ts, room, rng.random() < 0.5, ident))
            ts += 1
            ident += 1
        rng.shuffle(window)
        out.extend(window)
    return out
