"""
Builders for the example scenarios shipped in sbp/fixtures.

Each builder takes a params object (a dataclass with documented defaults)
and returns a scenario document, ready for `sbp.scenario.load_scenario` or
`sbp.scenario.dump_document`. `build(name)` runs a builder by its name.
"""
from .barker import BarkerParams, build_barker
from .chicken import ChickenParams, build_chicken
from .monkeys import MonkeyParams, build_monkeys
from .village import VillageParams, build_village

BUILDERS = {
    "barker": (build_barker, BarkerParams),
    "chicken": (build_chicken, ChickenParams),
    "monkeys": (build_monkeys, MonkeyParams),
    "village": (build_village, VillageParams),
}

# fixture file name -> (builder, params overrides)
FIXTURES = {
    "barker": ("barker", {}),
    "chicken": ("chicken", {}),
    "monkeys_guarded": ("monkeys", {"guarded": True}),
    "monkeys_unguarded": ("monkeys", {"guarded": False}),
    "village": ("village", {}),
}


def build(name, **overrides):
    """Build the scenario `name` ("chicken", "barker", ...); keyword
    arguments override the builder's default params."""
    if name not in BUILDERS:
        raise KeyError("No scenario builder named %r; choose from %s" % (name, ", ".join(sorted(BUILDERS))))
    builder, params_class = BUILDERS[name]
    return builder(params_class(**overrides))


def build_fixture(fixture):
    """Build the document a shipped fixture file holds, e.g. "monkeys_guarded"."""
    name, overrides = FIXTURES[fixture]
    return build(name, **overrides)
