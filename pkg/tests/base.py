from django.test import SimpleTestCase, override_settings

from sbp.model import Configuration, Entity, Process, TransitionDescription, World
from sbp.scenario import EngineSettings, fixture_path, load_document, load_scenario
from sbp.scenarios import build
from sbp.scheduler import run
from sbp.trace import MemoryTraceSink


def tdl_transition(name, source):
    return TransitionDescription(name, "tdl", source)


def make_config(worlds, tick=0):
    """
    Build a Configuration from nested dicts:

        make_config({"w": {"e": {"data": {...}, "transitions": {"t": "src"},
                                 "processes": {"p": "t"}}}})

    Transition sources are TDL; processes start Ready at `tick`.
    """
    config = Configuration(tick=tick)
    for world_name, entities in worlds.items():
        world = config.worlds[world_name] = World(world_name)
        for entity_name, spec in entities.items():
            world.entities[entity_name] = Entity(
                entity_name,
                data=dict(spec.get("data", {})),
                transitions={
                    name: tdl_transition(name, source) for name, source in spec.get("transitions", {}).items()
                },
                processes={
                    name: Process(name, transition, tick) for name, transition in spec.get("processes", {}).items()
                },
            )
    return config


@override_settings(SBP={})
class SbpTestCase(SimpleTestCase):
    def run_config(self, config, ticks, settings=None, seed=0, **kwargs):
        """Run `config`; returns (final configuration, summary, trace sink)."""
        settings = settings or EngineSettings()
        sink = MemoryTraceSink()
        final, summary = run(
            config,
            root_seed=seed,
            max_ticks=ticks,
            policy=kwargs.pop("policy", settings.policy),
            sinks=[sink],
            macros=settings.macros,
            host=kwargs.pop("host", None) or settings.host(),
            **kwargs
        )
        return final, summary, sink

    def load_fixture(self, name):
        return load_scenario(fixture_path(name))

    def build_scenario(self, name, **overrides):
        return load_document(build(name, **overrides))

    def committed(self, sink, prefix=""):
        """(tick, subject, update text) of every committed update starting with `prefix`."""
        return [
            (event.tick, event.subject, event.payload["update"])
            for event in sink.of_kind("update_committed")
            if event.payload["update"].startswith(prefix)
        ]

    def assertNoFailures(self, sink):
        failures = sink.of_kind("semantics_failure")
        self.assertEqual([], [(e.tick, e.subject, e.payload) for e in failures])
