"""
Two monkeys reach for one banana.

With guards, a grab only goes through while the banana is still on the
ground, and each monkey checks afterwards whether it really got it. Without
guards both monkeys reach after the same number of ticks: FailTick aborts
that tick, LastWriterWins lets the later monkey keep the banana while both
believe they hold it.
"""
from dataclasses import dataclass
from typing import Tuple

from ..values import Coord
from .base import document, entity, macro, tdl

GUARDED_GRAB = """\
wait(randomValue(1..%(grab_wait)d))
if exists(myworld.banana.loc) {
    emit {grabBanana}
    wait(1)
    if exists(myworld.banana.heldBy) and myworld.banana.heldBy == me {
        return stop {set_data me.holds_banana = true}
    }
}
return stop {}
"""

UNGUARDED_GRAB = """\
wait(me.reach)
if exists(myworld.banana.loc) {
    return stop {grabBananaUnguarded, set_data me.holds_banana = true}
}
return stop {}
"""

GUARDED_MACROS = {
    "grabBanana": macro(
        [],
        "when exists(myworld.banana.loc) do delete_data myworld.banana.loc",
        "when exists(myworld.banana.loc) do set_data myworld.banana.heldBy = me",
    ),
}

UNGUARDED_MACROS = {
    "grabBananaUnguarded": macro(
        [],
        "delete_data myworld.banana.loc",
        "set_data myworld.banana.heldBy = me",
    ),
}


@dataclass(frozen=True)
class MonkeyParams:
    guarded: bool = True
    monkeys: Tuple[str, ...] = ("m1", "m2")
    banana: Tuple[int, int] = (5, 5)
    grab_wait: int = 3
    # Unguarded monkeys all reach after this many ticks.
    reach: int = 2
    policy: str = "LastWriterWins"
    world: str = "jungle"


def build_monkeys(params=None):
    params = params or MonkeyParams()
    entities = {"banana": entity(data={"loc": Coord(*params.banana)})}
    for name in params.monkeys:
        if params.guarded:
            entities[name] = entity(
                transitions={"grab": tdl(GUARDED_GRAB % {"grab_wait": params.grab_wait})},
                processes={"grabbing": "grab"},
            )
        else:
            entities[name] = entity(
                data={"reach": params.reach},
                transitions={"grab": tdl(UNGUARDED_GRAB)},
                processes={"grabbing": "grab"},
            )
    macros = GUARDED_MACROS if params.guarded else UNGUARDED_MACROS
    return document({params.world: entities}, macros=macros, policy=params.policy)
