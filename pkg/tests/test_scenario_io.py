import io
import json
from dataclasses import replace

from sbp.exceptions import InvalidConfiguration, SchemaError, TdlError
from sbp.model import Awaiting, Path, Suspended
from sbp.scenario import (
    dump_document,
    fixture_path,
    load_document,
    load_scenario,
    load_snapshot,
    read_snapshot,
    save_snapshot,
    to_document,
)
from sbp.scenarios import FIXTURES, build_fixture
from sbp.scenarios.base import document, entity, macro, tdl
from sbp.updates import ConflictPolicy
from sbp.values import Coord, EntityRef

from .base import SbpTestCase


def small(**changes):
    """A one-entity scenario document; keyword arguments replace parts of the entity."""
    fields = entity(
        data={"n": 0, "loc": Coord(1, 2)},
        transitions={"count": tdl("wait(2)\nreturn {set_data me.n = me.n + 1}\n")},
        processes={"counting": "count"},
    )
    fields.update(changes)
    return document({"w": {"e": fields}}, macros={"bump": macro([], "set_data me.n = me.n + 1")})


class FixtureTest(SbpTestCase):
    def test_fixtures_match_their_builders(self):
        for name in FIXTURES:
            with open(fixture_path(name), encoding="utf-8") as f:
                self.assertEqual(dump_document(build_fixture(name)), f.read(), name)

    def test_fixtures_load_and_save_unchanged(self):
        for name in FIXTURES:
            config, settings = self.load_fixture(name)
            self.assertEqual(build_fixture(name), to_document(config, settings, snapshot=False), name)


class LoadTest(SbpTestCase):
    def test_sources(self):
        text = dump_document(small())
        for source in (small(), io.StringIO(text)):
            config, settings = load_scenario(source)
            self.assertEqual(Coord(1, 2), config.get_entity("w", "e").data["loc"])
            self.assertEqual(["bump"], list(settings.macros))
            self.assertEqual(ConflictPolicy.LAST_WRITER_WINS, settings.policy)
            self.assertIsNone(settings.seed)

    def test_snapshot_fields(self):
        doc = small()
        doc.update({"tick": 12, "seed": 42, "replayHash": "ab" * 32, "policy": "FirstWins"})
        config, settings = read_snapshot(doc)
        self.assertEqual(12, config.tick)
        self.assertEqual((42, "ab" * 32), (settings.seed, settings.replay_hash))
        self.assertEqual(ConflictPolicy.FIRST_WINS, settings.policy)
        self.assertEqual(12, load_snapshot(doc).get_entity("w", "e").processes["counting"].begin_tick)

    def test_warnings(self):
        _, settings = load_scenario(small(data={"friend": {"entity": "nobody"}}))
        self.assertEqual(1, len(settings.warnings))

    def test_schema_errors(self):
        cases = [
            (io.StringIO("{"), "document"),
            (io.StringIO("[]"), "document"),
            (dict(small(), version=2), "version"),
            (dict(small(), policy="Coinflip"), "policy"),
            (dict(small(), tick="12"), "tick"),
            (small(data={"loc": {"coord": [1.5, 0]}}), "worlds.w.e.data.loc"),
            (small(transitions={"count": {"semantics": "martian", "source": ""}}), "worlds.w.e.transitions.count.semantics"),
            (small(extra={}), "worlds.w.e"),
            (small(processes={"counting": {"transition": "count", "state": {"kind": "asleep"}}}), "worlds.w.e.processes.counting.state.kind"),
            (
                small(processes={"counting": {"transition": "count", "state": {"kind": "awaiting", "target": "w.e"}}}),
                "worlds.w.e.processes.counting.state.target",
            ),
            (dict(small(), macros={"bump": macro([], "bump")}), "macros.bump"),
            (dict(small(), semantics={"x": {"kind": "native", "behaviour": "nobody"}}), "semantics.x"),
        ]
        for source, where in cases:
            with self.assertRaises(SchemaError, msg=where) as cm:
                load_document(source)
            self.assertEqual(where, cm.exception.where)

    def test_tdl_errors(self):
        for source in ("wait(", "return {fly}", "return {bump(1)}", "let x = y"):
            with self.assertRaises(TdlError, msg=source) as cm:
                load_scenario(small(transitions={"count": tdl(source)}))
            self.assertEqual("count", cm.exception.transition)

    def test_invalid_configuration(self):
        with self.assertRaises(InvalidConfiguration):
            load_scenario(small(data={"count": 1}))


class SnapshotTest(SbpTestCase):
    def test_save_and_read_back(self):
        config, settings = load_scenario(small())
        final, summary, _ = self.run_config(config, 4, settings)
        process = final.get_entity("w", "e").processes["counting"]
        self.assertIsInstance(process.state, Suspended)

        stream = io.StringIO()
        text = save_snapshot(final, replace(settings, seed=0, replay_hash=summary.replay_hash), stream)
        self.assertEqual(text, stream.getvalue())
        self.assertEqual(4, json.loads(text)["tick"])

        again, again_settings = read_snapshot(io.StringIO(text))
        self.assertEqual(process, again.get_entity("w", "e").processes["counting"])
        self.assertEqual(summary.replay_hash, again_settings.replay_hash)
        self.assertEqual(text, dump_document(to_document(again, again_settings)))

    def test_awaiting_state(self):
        doc = small(
            processes={
                "counting": "count",
                "watching": {
                    "transition": "count",
                    "beginTick": 0,
                    "iteration": 2,
                    "state": {"kind": "awaiting", "target": "w.e.counting", "seen": [0, 0], "cursor": None},
                },
            }
        )
        config, settings = read_snapshot(doc)
        watching = config.get_entity("w", "e").processes["watching"]
        self.assertEqual(Awaiting(Path("w", "e", "counting"), None, (0, 0)), watching.state)
        self.assertEqual(doc["worlds"], to_document(config, settings)["worlds"])

    def test_resume_matches_an_uninterrupted_run(self):
        config, settings = self.load_fixture("chicken")
        _, whole, _ = self.run_config(config, 1000, settings, seed=42)

        config, settings = self.load_fixture("chicken")
        half, first, _ = self.run_config(config, 500, settings, seed=42)
        stream = io.StringIO()
        save_snapshot(half, replace(settings, seed=42, replay_hash=first.replay_hash), stream)

        resumed, resumed_settings = read_snapshot(io.StringIO(stream.getvalue()))
        self.assertEqual(500, resumed.tick)
        _, second, _ = self.run_config(
            resumed,
            500,
            resumed_settings,
            seed=resumed_settings.seed,
            replay_hash=resumed_settings.replay_hash,
        )
        self.assertEqual(1000, second.final_tick)
        self.assertEqual(whole.replay_hash, second.replay_hash)

    def test_refs_are_saved_tagged(self):
        config, settings = load_scenario(small(data={"friend": {"entity": "e"}}))
        self.assertEqual(EntityRef("e"), config.get_entity("w", "e").data["friend"])
        saved = to_document(config, settings)["worlds"]["w"]["e"]["data"]
        self.assertEqual({"entity": "e"}, saved["friend"])
