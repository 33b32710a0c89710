from django.test import SimpleTestCase

from sbp.exceptions import NotFound, SourceMissing, TargetExists
from sbp.model import (
    READY,
    Path,
    Process,
    Suspended,
    check_invariants,
    clone_world,
    errors_only,
    path_exists,
    resolve_path,
    validate_configuration,
)
from sbp.values import Coord, EntityRef, WorldRef

from .base import make_config
from .factories import ProcessFactory, TransitionFactory, config_of, entity_with, world_of


def kinds(violations):
    return sorted(violation.kind for violation in violations)


class PathTest(SimpleTestCase):
    def test_parse_and_render(self):
        path = Path.parse("w.ch.loc")
        self.assertEqual(Path("w", "ch", "loc"), path)
        self.assertEqual("w.ch.loc", str(path))
        self.assertEqual('w."a-b"', str(Path("w", "a-b")))

    def test_property_needs_entity(self):
        with self.assertRaises(ValueError):
            Path("w", None, "loc")

    def test_sort_key_orders_worlds_first(self):
        paths = [Path("w", "b"), Path("v"), Path("w", "a", "z"), Path("w")]
        self.assertEqual(
            ["v", "w", "w.a.z", "w.b"],
            [str(path) for path in sorted(paths, key=Path.sort_key)],
        )


class ResolvePathTest(SimpleTestCase):
    def setUp(self):
        self.config = make_config(
            {
                "w": {
                    "ch": {
                        "data": {"loc": Coord(1, 2)},
                        "transitions": {"mv": "wait(1)\n"},
                        "processes": {"move": "mv"},
                    }
                }
            }
        )

    def test_each_kind(self):
        self.assertEqual("w", resolve_path(self.config, "w").name)
        self.assertEqual("ch", resolve_path(self.config, "w.ch").name)
        self.assertEqual(Coord(1, 2), resolve_path(self.config, "w.ch.loc"))
        self.assertEqual("tdl", resolve_path(self.config, "w.ch.mv").semantics)
        self.assertEqual("mv", resolve_path(self.config, "w.ch.move").transition)

    def test_not_found_names_the_missing_segment(self):
        for spec, segment in (("v.ch.loc", "world"), ("w.hen.loc", "entity"), ("w.ch.age", "property")):
            with self.assertRaises(NotFound) as cm:
                resolve_path(self.config, spec)
            self.assertEqual(segment, cm.exception.segment)
        self.assertFalse(path_exists(self.config, "w.ch.age"))
        self.assertTrue(path_exists(self.config, "w.ch"))


class ValidateConfigurationTest(SimpleTestCase):
    def test_valid(self):
        mv = TransitionFactory(name="mv")
        ch = entity_with("ch", friend=EntityRef("hen"))
        ch.transitions["mv"] = mv
        ch.processes["move"] = ProcessFactory(name="move", transition="mv")
        config = config_of(world_of("w", ch, entity_with("hen")))
        self.assertEqual([], validate_configuration(config))

    def test_duplicate_property_name(self):
        ch = entity_with("ch", loc=Coord(0, 0))
        ch.transitions["loc"] = TransitionFactory(name="loc")
        config = config_of(world_of("w", ch))
        self.assertEqual(["DuplicateName"], kinds(errors_only(validate_configuration(config))))
        with self.assertRaises(AssertionError):
            check_invariants(config)

    def test_dangling_references_are_warnings(self):
        ch = entity_with("ch", friend=EntityRef("nobody"), home=WorldRef("nowhere"))
        violations = validate_configuration(config_of(world_of("w", ch)))
        self.assertEqual(["DanglingRef", "DanglingRef"], kinds(violations))
        self.assertEqual([], errors_only(violations))

    def test_unresolved_transition(self):
        ch = entity_with("ch")
        ch.processes["move"] = ProcessFactory(name="move", transition="gone")
        violations = validate_configuration(config_of(world_of("w", ch)))
        self.assertEqual(["UnresolvedTransition"], kinds(violations))
        self.assertEqual("warning", violations[0].severity)

    def test_stale_suspension(self):
        ch = entity_with("ch")
        ch.transitions["mv"] = TransitionFactory(name="mv")
        ch.processes["move"] = Process("move", "mv", 0, 0, Suspended(3, None))
        config = config_of(world_of("w", ch), tick=5)
        self.assertEqual(["StaleSuspension"], kinds(validate_configuration(config)))

    def test_suspension_due_now_is_not_stale(self):
        # what a snapshot taken right before the resuming tick holds
        ch = entity_with("ch")
        ch.transitions["mv"] = TransitionFactory(name="mv")
        ch.processes["move"] = Process("move", "mv", 0, 0, Suspended(5, None))
        self.assertEqual([], kinds(validate_configuration(config_of(world_of("w", ch), tick=5))))

    def test_misnamed_entity(self):
        config = config_of(world_of("w", entity_with("ch")))
        config.worlds["w"].entities["hen"] = config.worlds["w"].entities.pop("ch")
        self.assertEqual(["InvalidName"], kinds(validate_configuration(config)))

    def test_invalid_value(self):
        config = config_of(world_of("w", entity_with("ch", things=[1, 2])))
        self.assertEqual(["InvalidValue"], kinds(validate_configuration(config)))


class CloneWorldTest(SimpleTestCase):
    def setUp(self):
        self.config = make_config(
            {"w": {"ch": {"data": {"n": 1}, "transitions": {"t": "wait(1)\n"}, "processes": {"p": "t"}}}},
            tick=7,
        )
        self.config = self.config.copy()
        owner = self.config.worlds["w"].entities["ch"]
        owner.processes["p"] = Process("p", "t", 2, 4, Suspended(9, '{"kind":"tdl"}'))

    def test_copy_restarts_processes(self):
        result = clone_world(self.config, "w", "hyp")
        copied = result.worlds["hyp"].entities["ch"]
        self.assertEqual({"n": 1}, copied.data)
        self.assertEqual(self.config.worlds["w"].entities["ch"].transitions, copied.transitions)
        self.assertEqual(Process("p", "t", 8, 4, READY), copied.processes["p"])
        self.assertNotIn("hyp", self.config.worlds)

    def test_copy_is_independent(self):
        result = clone_world(self.config, "w", "hyp")
        result.worlds["hyp"].entities["ch"].data["n"] = 2
        self.assertEqual(1, self.config.worlds["w"].entities["ch"].data["n"])

    def test_errors(self):
        with self.assertRaises(SourceMissing):
            clone_world(self.config, "v", "hyp")
        with self.assertRaises(TargetExists):
            clone_world(self.config, "w", "w")
