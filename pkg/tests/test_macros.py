from django.test import SimpleTestCase

from sbp.exceptions import ExpansionFailure, UnknownMacro
from sbp.macros import MacroRegistry, expand_update
from sbp.model import Path
from sbp.updates import DeleteData, Guarded, Macro, NotExists, SetData
from sbp.values import Coord, EntityRef

from .base import make_config

DECLARATIONS = {
    "mv_up": {"params": [], "expansion": ["set_data me.loc = me.loc + (0, 1)"]},
    "eatCorn": {
        "params": ["c"],
        "expansion": ["delete_data $c.loc", "set_data $c.eatenBy = me"],
    },
    "claim": {
        "params": ["c"],
        "expansion": ["when missing($c.eatenBy) do set_data $c.eatenBy = me"],
    },
}


class MacroRegistryTest(SimpleTestCase):
    def test_build(self):
        registry, problems = MacroRegistry.build(DECLARATIONS)
        self.assertEqual([], problems)
        self.assertEqual(["claim", "eatCorn", "mv_up"], list(registry))
        self.assertEqual({"claim": 1, "eatCorn": 1, "mv_up": 0}, registry.arities())
        self.assertEqual(DECLARATIONS, registry.declarations())

    def test_problems(self):
        declarations = dict(DECLARATIONS)
        declarations.update(
            {
                "bad name": {"expansion": ["delete_data me.x"]},
                "unknown_param": {"params": ["x"], "expansion": ["set_data me.a = $y"]},
                "nested": {"expansion": ["mv_up"]},
                "broken": {"expansion": ["set_data me.a ="]},
            }
        )
        registry, problems = MacroRegistry.build(declarations)
        self.assertEqual(
            ["bad name", "broken", "nested", "unknown_param"],
            sorted({name for name, _ in problems}),
        )
        self.assertEqual(3, len(registry))
        self.assertNotIn("nested", registry)

    def test_get_unknown(self):
        registry, _ = MacroRegistry.build(DECLARATIONS)
        with self.assertRaises(UnknownMacro):
            registry.get("fly")


class ExpandUpdateTest(SimpleTestCase):
    def setUp(self):
        self.macros, _ = MacroRegistry.build(DECLARATIONS)
        self.snapshot = make_config(
            {
                "w": {
                    "ch": {"data": {"loc": Coord(1, 1)}},
                    "corn": {"data": {"loc": Coord(1, 1)}},
                    "rock": {},
                }
            },
            tick=4,
        )
        self.emitter = Path("w", "ch", "eat")

    def expand(self, update, emitter=None):
        return expand_update(update, self.snapshot, self.macros, emitter or self.emitter)

    def test_core_updates_pass_through(self):
        update = DeleteData("w", "ch", "loc")
        self.assertEqual([update], self.expand(update))

    def test_me_is_the_emitter(self):
        self.assertEqual([SetData("w", "ch", "loc", Coord(1, 2))], self.expand(Macro("mv_up")))

    def test_arguments(self):
        self.assertEqual(
            [DeleteData("w", "corn", "loc"), SetData("w", "corn", "eatenBy", EntityRef("ch"))],
            self.expand(Macro("eatCorn", (EntityRef("corn"),))),
        )

    def test_guarded_template(self):
        self.assertEqual(
            [
                Guarded(
                    NotExists(Path("w", "corn", "eatenBy")),
                    SetData("w", "corn", "eatenBy", EntityRef("ch")),
                )
            ],
            self.expand(Macro("claim", (EntityRef("corn"),))),
        )

    def test_wrong_arity(self):
        with self.assertRaises(ExpansionFailure) as cm:
            self.expand(Macro("eatCorn"))
        self.assertEqual("eatCorn", cm.exception.macro)

    def test_unknown(self):
        with self.assertRaises(UnknownMacro):
            self.expand(Macro("fly"))

    def test_fault_while_expanding(self):
        with self.assertRaises(ExpansionFailure):
            self.expand(Macro("mv_up"), emitter=Path("w", "rock", "p"))
