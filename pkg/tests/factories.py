import factory
import factory.fuzzy

from sbp.model import Configuration, Entity, Process, TransitionDescription, World
from sbp.values import Coord


class TransitionFactory(factory.Factory):
    class Meta:
        model = TransitionDescription

    name = factory.Sequence(lambda n: "t%d" % n)
    semantics = "tdl"
    source = "wait(1)\n"


class ProcessFactory(factory.Factory):
    class Meta:
        model = Process

    name = factory.Sequence(lambda n: "p%d" % n)
    transition = "t"
    begin_tick = 0
    iteration = 0


class EntityFactory(factory.Factory):
    class Meta:
        model = Entity

    name = factory.Sequence(lambda n: "e%d" % n)
    data = factory.LazyFunction(
        lambda: {"loc": Coord(factory.fuzzy.FuzzyInteger(-9, 9).fuzz(), factory.fuzzy.FuzzyInteger(-9, 9).fuzz())}
    )
    transitions = factory.LazyFunction(dict)
    processes = factory.LazyFunction(dict)


class WorldFactory(factory.Factory):
    class Meta:
        model = World

    name = factory.Sequence(lambda n: "w%d" % n)
    entities = factory.LazyFunction(dict)


class ConfigurationFactory(factory.Factory):
    class Meta:
        model = Configuration

    worlds = factory.LazyFunction(dict)
    tick = 0


def entity_with(name, **data):
    return EntityFactory(name=name, data=data)


def world_of(name, *entities):
    return WorldFactory(name=name, entities={entity.name: entity for entity in entities})


def config_of(*worlds, tick=0):
    return ConfigurationFactory(worlds={world.name: world for world in worlds}, tick=tick)
