"""
Scenario and snapshot documents.

Both are the same JSON document; a scenario is a snapshot at tick 0 without
a replay hash. See docs/scenarios.rst for the schema. The canonical text of
a document (`dump_document`) has sorted keys, two-space indentation and a
trailing newline, so saving a loaded document reproduces it byte for byte.
"""
import json
import logging
import os
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from django.core.exceptions import ValidationError

from .exceptions import InvalidConfiguration, SchemaError, TdlError
from .macros import MacroRegistry
from .model import (
    READY,
    Awaiting,
    Configuration,
    Entity,
    Path,
    Process,
    Ready,
    Suspended,
    TransitionDescription,
    World,
    errors_only,
    validate_configuration,
)
from .scheduler import GENESIS_HASH
from .semantics import DEFAULT_BINDINGS, TDL, SemanticsBinding, SemanticsHost, library
from .tdl.checker import check
from .tdl.parser import parse
from .updates import ConflictPolicy
from .utils import setting
from .values import decode_value, encode_value

logger = logging.getLogger(__name__)

VERSION = 1
SCENARIO_SUFFIX = ".scenario"
SNAPSHOT_SUFFIX = ".snapshot"
FIXTURE_DIR = os.path.join(os.path.dirname(__file__), "fixtures")


@dataclass
class EngineSettings:
    """Everything besides the configuration that a document fixes for a run."""

    policy: ConflictPolicy = ConflictPolicy.LAST_WRITER_WINS
    macros: MacroRegistry = field(default_factory=MacroRegistry)
    semantics: Tuple[SemanticsBinding, ...] = DEFAULT_BINDINGS
    seed: Optional[int] = None
    replay_hash: Optional[str] = None
    warnings: List[str] = field(default_factory=list)

    def host(self, **kwargs):
        return SemanticsHost(self.semantics, **kwargs)


def fixture_path(name):
    return os.path.join(FIXTURE_DIR, name + SCENARIO_SUFFIX)


def dump_document(document):
    return json.dumps(document, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _read_document(source):
    if isinstance(source, dict):
        return source
    if hasattr(source, "read"):
        text = source.read()
    else:
        with open(source, encoding="utf-8") as f:
            text = f.read()
    try:
        document = json.loads(text)
    except ValueError as e:
        raise SchemaError("document", "not valid JSON: %s" % e)
    if not isinstance(document, dict):
        raise SchemaError("document", "expected a JSON object")
    return document


def _expect(value, types, where, what):
    # bool is an int subclass, but true is not a tick
    if not isinstance(value, types) or (isinstance(value, bool) and types is int):
        raise SchemaError(where, "expected %s" % what)
    return value


def _cursor_text(data, where):
    if data is None:
        return None
    if not isinstance(data, dict):
        raise SchemaError(where, "a cursor must be an object")
    return json.dumps(data, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def _cursor_document(cursor):
    return json.loads(cursor) if cursor else None


class _Loader(object):
    def __init__(self, library):
        self.library = library
        self.warnings = []

    def load(self, document):
        version = document.get("version", VERSION)
        if version != VERSION:
            raise SchemaError("version", "unsupported version %r" % (version,))
        tick = _expect(document.get("tick", 0), int, "tick", "an integer")
        try:
            policy = ConflictPolicy.parse(
                document.get("policy", setting("DEFAULT_POLICY", ConflictPolicy.LAST_WRITER_WINS))
            )
        except ValueError as e:
            raise SchemaError("policy", str(e))

        macros = self.macros(_expect(document.get("macros", {}), dict, "macros", "an object"))
        bindings = self.semantics(_expect(document.get("semantics", {}), dict, "semantics", "an object"))
        kinds = {binding.id: binding.kind for binding in bindings}

        config = Configuration(tick=tick)
        worlds = _expect(document.get("worlds", {}), dict, "worlds", "an object")
        for world_name in sorted(worlds):
            where = "worlds.%s" % world_name
            entities = _expect(worlds[world_name], dict, where, "an object of entities")
            world = config.worlds[world_name] = World(world_name)
            for entity_name in sorted(entities):
                world.entities[entity_name] = self.entity(
                    world_name, entity_name, entities[entity_name], tick, kinds, macros
                )

        violations = validate_configuration(config)
        errors = errors_only(violations)
        if errors:
            raise InvalidConfiguration(errors)
        self.warnings.extend(str(violation) for violation in violations)

        seed = document.get("seed")
        if seed is not None:
            _expect(seed, int, "seed", "an integer")
        replay_hash = document.get("replayHash")
        if replay_hash is not None:
            _expect(replay_hash, str, "replayHash", "a hex digest")
        settings = EngineSettings(policy, macros, bindings, seed, replay_hash, self.warnings)
        return config, settings

    def macros(self, declarations):
        for name, declaration in declarations.items():
            where = "macros.%s" % name
            _expect(declaration, dict, where, "an object with params and expansion")
            params = _expect(declaration.get("params", []), list, where + ".params", "a list of names")
            if not all(isinstance(param, str) for param in params):
                raise SchemaError(where + ".params", "expected a list of names")
            expansion = _expect(declaration.get("expansion", []), list, where + ".expansion", "a list")
            if not all(isinstance(source, str) for source in expansion):
                raise SchemaError(where + ".expansion", "expected a list of update expressions")
        registry, problems = MacroRegistry.build(declarations)
        if problems:
            name, message = problems[0]
            raise SchemaError("macros.%s" % name, message)
        return registry

    def semantics(self, declarations):
        bindings = list(DEFAULT_BINDINGS)
        for semantics_id in sorted(declarations):
            binding = SemanticsBinding.from_document(semantics_id, declarations[semantics_id], self.library)
            bindings = [b for b in bindings if b.id != semantics_id] + [binding]
        return tuple(bindings)

    def entity(self, world_name, entity_name, document, tick, kinds, macros):
        where = "worlds.%s.%s" % (world_name, entity_name)
        _expect(document, dict, where, "an object with data, transitions and processes")
        unknown = set(document) - {"data", "transitions", "processes"}
        if unknown:
            raise SchemaError(where, "unknown key(s) %s" % ", ".join(sorted(unknown)))
        entity = Entity(entity_name)

        data = _expect(document.get("data", {}), dict, where + ".data", "an object")
        for key in sorted(data):
            try:
                entity.data[key] = decode_value(data[key])
            except ValueError as e:
                raise SchemaError("%s.data.%s" % (where, key), str(e))

        transitions = _expect(document.get("transitions", {}), dict, where + ".transitions", "an object")
        for name in sorted(transitions):
            here = "%s.transitions.%s" % (where, name)
            spec = _expect(transitions[name], dict, here, "an object with semantics and source")
            semantics = spec.get("semantics", TDL)
            source = _expect(spec.get("source", ""), str, here + ".source", "a string")
            if semantics not in kinds:
                raise SchemaError(here + ".semantics", "unknown semantics id %r" % (semantics,))
            if kinds[semantics] == TDL:
                self.check_source("%s.%s" % (world_name, entity_name), name, source, macros)
            entity.transitions[name] = TransitionDescription(name, semantics, source)

        processes = _expect(document.get("processes", {}), dict, where + ".processes", "an object")
        for name in sorted(processes):
            entity.processes[name] = self.process(name, processes[name], "%s.processes.%s" % (where, name), tick)
        return entity

    def check_source(self, owner, name, source, macros):
        program, diagnostics = parse(source)
        if program is not None:
            diagnostics = list(diagnostics) + check(program, macros.arities())
        errors = [diagnostic for diagnostic in diagnostics if diagnostic.is_error]
        if errors:
            raise TdlError(owner, name, errors)
        for diagnostic in diagnostics:
            self.warnings.append("%s.%s: %s" % (owner, name, diagnostic))

    def process(self, name, document, where, tick):
        if isinstance(document, str):
            return Process(name, document, tick, 0, READY)
        _expect(document, dict, where, "a transition name or a process object")
        transition = _expect(document.get("transition"), str, where + ".transition", "a transition name")
        begin_tick = _expect(document.get("beginTick", tick), int, where + ".beginTick", "an integer")
        iteration = _expect(document.get("iteration", 0), int, where + ".iteration", "an integer")
        state = _expect(document.get("state", {"kind": "ready"}), dict, where + ".state", "an object")
        kind = state.get("kind")
        if kind == "ready":
            process_state = READY
        elif kind == "suspended":
            resume = _expect(state.get("resumeTick"), int, where + ".state.resumeTick", "an integer")
            process_state = Suspended(resume, _cursor_text(state.get("cursor"), where + ".state.cursor"))
        elif kind == "awaiting":
            target = _expect(state.get("target"), str, where + ".state.target", "a process path")
            try:
                target_path = Path.parse(target)
            except ValidationError as e:
                raise SchemaError(where + ".state.target", "; ".join(e.messages))
            if target_path.property is None:
                raise SchemaError(where + ".state.target", "expected world.entity.process")
            seen = state.get("seen")
            if seen is not None:
                if not (isinstance(seen, list) and len(seen) == 2 and all(type(n) is int for n in seen)):
                    raise SchemaError(where + ".state.seen", "expected [iteration, beginTick]")
                seen = tuple(seen)
            process_state = Awaiting(target_path, _cursor_text(state.get("cursor"), where + ".state.cursor"), seen)
        else:
            raise SchemaError(where + ".state.kind", "expected ready, suspended or awaiting")
        return Process(name, transition, begin_tick, iteration, process_state)


def load_document(source, library=library):
    """Load a scenario or snapshot; returns (Configuration, EngineSettings)."""
    loader = _Loader(library)
    config, settings = loader.load(_read_document(source))
    for warning in settings.warnings:
        logger.debug("Loaded with warning: %s", warning)
    return config, settings


def load_scenario(source, library=library):
    """
    Load a .scenario document from a path, a file object or an already
    parsed dict. Raises SchemaError, TdlError or InvalidConfiguration.
    """
    return load_document(source, library)


def read_snapshot(source, library=library):
    return load_document(source, library)


def load_snapshot(source, library=library):
    config, _ = load_document(source, library)
    return config


def _process_document(process, tick):
    if isinstance(process.state, Ready) and process.iteration == 0 and process.begin_tick == tick:
        return process.transition
    state = process.state
    if isinstance(state, Ready):
        state_document = {"kind": "ready"}
    elif isinstance(state, Suspended):
        state_document = {
            "kind": "suspended",
            "resumeTick": state.resume_tick,
            "cursor": _cursor_document(state.cursor),
        }
    elif isinstance(state, Awaiting):
        state_document = {
            "kind": "awaiting",
            "target": str(state.target),
            "cursor": _cursor_document(state.cursor),
            "seen": list(state.seen) if state.seen is not None else None,
        }
    else:
        raise TypeError("Cannot save a process in state %r" % (state,))
    return {
        "transition": process.transition,
        "beginTick": process.begin_tick,
        "iteration": process.iteration,
        "state": state_document,
    }


def to_document(config, settings=None, snapshot=True):
    """The document for `config`; scenario documents leave out the run state."""
    if settings is None:
        settings = EngineSettings()
    document = {
        "version": VERSION,
        "policy": settings.policy.value,
        "macros": settings.macros.declarations(),
        "semantics": {
            binding.id: binding.to_document()
            for binding in settings.semantics
            if binding not in DEFAULT_BINDINGS
        },
        "worlds": {},
    }
    if snapshot:
        document["tick"] = config.tick
        document["replayHash"] = settings.replay_hash or GENESIS_HASH
        if settings.seed is not None:
            document["seed"] = settings.seed
    for world_name, world in config.worlds.items():
        entities = document["worlds"][world_name] = {}
        for entity_name, entity in world.entities.items():
            entities[entity_name] = {
                "data": {key: encode_value(value) for key, value in entity.data.items()},
                "transitions": {
                    key: {"semantics": transition.semantics, "source": transition.source}
                    for key, transition in entity.transitions.items()
                },
                "processes": {
                    key: _process_document(process, config.tick) for key, process in entity.processes.items()
                },
            }
    return document


def save_snapshot(config, settings, destination):
    """Write the canonical snapshot of `config` to a path or a text stream."""
    text = dump_document(to_document(config, settings))
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        with open(destination, "w", encoding="utf-8") as f:
            f.write(text)
    logger.info("Saved snapshot of tick %d", config.tick)
    return text
