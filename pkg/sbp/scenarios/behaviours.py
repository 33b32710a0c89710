"""
Python behaviours for the village scenario. Imported when the app is ready
so the bindings in sbp/fixtures/village.scenario can find them.
"""
import logging

from ..model import ResultStructure
from ..semantics import library
from ..updates import CancelProcess, CopyProperties, CreateEntity, DeleteEntity, SetData, StartProcess
from ..values import Coord
from .village import route_x

logger = logging.getLogger(__name__)

PEOPLE_PER_VILLAGER = 10


def villager_name(number):
    return "villager%03d" % number


def _village_worlds(ctx):
    me = ctx.me
    return me.data["actWorld"].name, me.data["apxWorld"].name


def _villagers(world):
    return sorted(
        name for name, entity in world.entities.items() if entity.data.get("villager") is True
    )


@library.native("village.enter")
def enter_village(ctx):
    """Switch the village to its detailed simulation: one working villager
    per ten inhabitants of the approximate world."""
    act, apx = _village_worlds(ctx)
    detailed = ctx.snapshot.worlds[act]
    population = ctx.snapshot.get_entity(apx, "stats").data["population"]
    wanted = [villager_name(number) for number in range(1, population // PEOPLE_PER_VILLAGER + 1)]
    existing = _villagers(detailed)

    updates = [DeleteEntity(act, name) for name in existing if name not in wanted]
    for name in wanted:
        if name not in existing:
            updates += [
                CreateEntity(act, name),
                CopyProperties(act, "template", act, name),
                SetData(act, name, "villager", True),
            ]
        updates.append(StartProcess(act, name, "live", "work"))
    updates.append(CancelProcess(apx, "stats", "growing"))
    logger.info("%s: player arrived, %d villagers at work", ctx.path, len(wanted))
    return ResultStructure(tuple(updates), False)


@library.native("village.leave")
def leave_village(ctx):
    """Fold the detailed simulation back into the village stats."""
    act, apx = _village_worlds(ctx)
    detailed = ctx.snapshot.worlds[act]
    updates = []
    bread = 0
    for name in _villagers(detailed):
        villager = detailed.entities[name]
        bread += villager.data.get("loaves", 0)
        if "live" in villager.processes:
            updates.append(CancelProcess(act, name, "live"))
    updates += [
        SetData(apx, "stats", "bread", bread),
        StartProcess(apx, "stats", "growing", "grow"),
    ]
    logger.info("%s: player left, %d loaves baked", ctx.path, bread)
    return ResultStructure(tuple(updates), False)


def _player_step(world, entity, tick):
    return SetData(world, entity, "loc", Coord(route_x(tick), 0))


@library.native("village.player_route")
def player_route(ctx):
    return ResultStructure((_player_step(ctx.world, ctx.entity, ctx.tick),), True)


@library.script("village.player_route")
def player_route_driver(request):
    """The same walk as an external driver would answer it."""
    step = _player_step(request["world"], request["entity"], request["tick"])
    return {"updates": [step.render()], "cont": True, "wait": 0}
