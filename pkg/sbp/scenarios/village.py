"""
A player walks back and forth past a village. While the player is away
the village is simulated cheaply: one stats entity whose population grows
now and then. When the player comes close, a native behaviour hands over
to a detailed simulation with one entity per ten inhabitants, each baking
bread. When the player leaves, the bread is summed back into the stats and
the cheap simulation takes over again.

The player is driven by "player_driver", an external driver by default;
`VillageParams(driver="native")` binds the same transition to a native
behaviour instead. Both give the same run.
"""
from dataclasses import dataclass

from ..semantics import CANCEL, EXTERNAL, NATIVE
from ..values import Coord, WorldRef
from .base import document, entity, tdl

WATCH = """\
wait(1)
let d = distance(myworld.player.loc, me.loc)
if d <= me.radius and not me.playerNear {
    return {set_data me.playerNear = true, start_process me.handover <- "enter_village"}
}
if d > me.radius and me.playerNear {
    return {set_data me.playerNear = false, start_process me.handover <- "leave_village"}
}
"""

WORK = """\
wait(1)
return {set_data me.loaves = me.loaves + 1}
"""

GROW = """\
wait(%(grow_wait)d)
return {set_data me.population = me.population + 1}
"""

DRIVERS = ("script", "native")


def bound(semantics_id):
    # Native and external transitions ignore their source.
    return {"semantics": semantics_id, "source": ""}


@dataclass(frozen=True)
class VillageParams:
    village_loc: int = 15
    radius: int = 3
    population: int = 40
    grow_wait: int = 5
    driver: str = "script"
    world: str = "map"
    village: str = "v1"


def route_x(tick, length=30):
    """The player's x position at `tick`: out to `length` and back."""
    phase = tick % (2 * length)
    return phase if phase <= length else 2 * length - phase


def build_village(params=None):
    params = params or VillageParams()
    if params.driver not in DRIVERS:
        raise ValueError("driver must be one of %s" % ", ".join(DRIVERS))
    act = "%s_act" % params.village
    apx = "%s_apx" % params.village
    worlds = {
        params.world: {
            "player": entity(
                data={"loc": Coord(0, 0)},
                transitions={"route": bound("player_driver")},
                processes={"walk": "route"},
            ),
            params.village: entity(
                data={
                    "loc": Coord(params.village_loc, 0),
                    "radius": params.radius,
                    "playerNear": False,
                    "actWorld": WorldRef(act),
                    "apxWorld": WorldRef(apx),
                },
                transitions={
                    "watch": tdl(WATCH),
                    "enter_village": bound("village_enter"),
                    "leave_village": bound("village_leave"),
                },
                processes={"watching": "watch"},
            ),
        },
        act: {
            "template": entity(data={"loaves": 0}, transitions={"work": tdl(WORK)}),
        },
        apx: {
            "stats": entity(
                data={"population": params.population},
                transitions={"grow": tdl(GROW % {"grow_wait": params.grow_wait})},
                processes={"growing": "grow"},
            ),
        },
    }
    if params.driver == "native":
        player_driver = {"kind": NATIVE, "behaviour": "village.player_route"}
    else:
        player_driver = {
            "kind": EXTERNAL,
            "channel": "script:village.player_route",
            "onTimeout": CANCEL,
            "readView": [],
        }
    semantics = {
        "player_driver": player_driver,
        "village_enter": {"kind": NATIVE, "behaviour": "village.enter"},
        "village_leave": {"kind": NATIVE, "behaviour": "village.leave"},
    }
    return document(worlds, semantics=semantics)
