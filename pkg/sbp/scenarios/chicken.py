"""
Chickens run around randomly and eat the corn they step on. One special
corn, the corn of wisdom, teaches whoever eats it a smarter way to move:
it copies its `mvSmart` transition to the eater and rebinds the eater's
`move` process to it.
"""
from dataclasses import dataclass
from typing import Optional, Tuple

from ..values import Coord
from .base import document, entity, macro, tdl

MV_RAND = """\
# Random walk: wait a while, then take one step in a random direction.
wait(randomValue(1..%(move_wait)d))
let dir = randomValue(1..4)
switch dir {
    case 1 { return {mv_up} }
    case 2 { return {mv_right} }
    case 3 { return {mv_down} }
    case 4 { return {mv_left} }
}
"""

MV_SMART = """\
# Step towards the nearest corn, along the axis where it is furthest away.
wait(randomValue(1..%(smart_wait)d))
select en in myworld where contains(en.types, "corn") minimizing distance(en.loc, me.loc) {
    let distX = en.loc.x - me.loc.x
    let distY = en.loc.y - me.loc.y
    if abs(distX) > abs(distY) {
        if distX > 0 {
            return {mv_right}
        } else {
            return {mv_left}
        }
    } else if distY > 0 {
        return {mv_down}
    } else if distY < 0 {
        return {mv_up}
    }
}
"""

EAT = """\
select en in myworld where contains(en.types, "corn") and en.loc == me.loc {
    return {eatCorn(en)}
} else {
    wait(%(eat_wait)d)
}
"""

BEEN_EATEN = """\
return stop {delete_me}
"""

WISDOM_BEEN_EATEN = """\
# Whoever eats this corn learns to move smartly.
return stop {
    delete_me,
    copy_properties me -> me.eatenBy only ["mvSmart"],
    rebind_process me.eatenBy.move <- "mvSmart"
}
"""

MACROS = {
    "mv_up": macro([], "set_data me.loc = me.loc + (0, -1)"),
    "mv_down": macro([], "set_data me.loc = me.loc + (0, 1)"),
    "mv_left": macro([], "set_data me.loc = me.loc + (-1, 0)"),
    "mv_right": macro([], "set_data me.loc = me.loc + (1, 0)"),
    "delete_me": macro([], "delete_entity me"),
    "eatCorn": macro(
        ["en"],
        "delete_data $en.loc",
        "set_data $en.eatenBy = me",
        'start_process $en.eaten <- "beenEaten"',
    ),
}


@dataclass(frozen=True)
class ChickenParams:
    chickens: Tuple[Tuple[int, int], ...] = ((0, 0), (6, 2), (-4, 5), (3, -7))
    corn: Tuple[Tuple[int, int], ...] = (
        (2, 1),
        (-3, -2),
        (5, 5),
        (-6, 1),
        (1, -5),
        (7, -3),
        (-2, 6),
        (4, 8),
        (-8, -4),
        (0, 9),
        (9, 0),
        (-5, -7),
    )
    # The first chicken starts on the corn of wisdom, so it is eaten at once.
    wisdom: Optional[Tuple[int, int]] = (0, 0)
    move_wait: int = 5000
    smart_wait: int = 1000
    eat_wait: int = 10
    world: str = "w"


def build_chicken(params=None):
    params = params or ChickenParams()
    waits = {
        "move_wait": params.move_wait,
        "smart_wait": params.smart_wait,
        "eat_wait": params.eat_wait,
    }
    entities = {}
    for number, (x, y) in enumerate(params.chickens, 1):
        entities["chicken%d" % number] = entity(
            data={"loc": Coord(x, y), "types": ("chicken",)},
            transitions={"mvRand": tdl(MV_RAND % waits), "eatNearby": tdl(EAT % waits)},
            processes={"move": "mvRand", "eat": "eatNearby"},
        )
    for number, (x, y) in enumerate(params.corn, 1):
        entities["corn%d" % number] = entity(
            data={"loc": Coord(x, y), "types": ("corn",)},
            transitions={"beenEaten": tdl(BEEN_EATEN)},
        )
    if params.wisdom is not None:
        x, y = params.wisdom
        entities["cornOfWisdom"] = entity(
            data={"loc": Coord(x, y), "types": ("corn",)},
            transitions={"beenEaten": tdl(WISDOM_BEEN_EATEN), "mvSmart": tdl(MV_SMART % waits)},
        )
    return document({params.world: entities}, macros=MACROS)
