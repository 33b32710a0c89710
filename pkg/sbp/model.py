"""
The state model: configurations of named worlds, worlds of named entities,
and entities holding three maps of properties (data entries, transition
descriptions and processes).

Configurations handed out by the engine are snapshots and must be treated as
read-only. Code that builds the next configuration copies the containers it
changes (`Configuration.copy`, `World.copy`, `Entity.copy`); values,
transition descriptions and processes are immutable and shared.
"""
from dataclasses import dataclass, field, replace
from typing import Dict, Optional, Tuple

from .exceptions import NotFound, SourceMissing, TargetExists
from .utils import is_valid_name, render_name, split_path
from .values import EntityRef, WorldRef, is_value

DATA = "data"
TRANSITION = "transition"
PROCESS = "process"


@dataclass(frozen=True)
class Path:
    world: str
    entity: Optional[str] = None
    property: Optional[str] = None

    def __post_init__(self):
        if self.property is not None and self.entity is None:
            raise ValueError("A path with a property needs an entity")

    @classmethod
    def parse(cls, text):
        if isinstance(text, Path):
            return text
        return cls(*split_path(text))

    def as_tuple(self):
        return tuple(part for part in (self.world, self.entity, self.property) if part is not None)

    def sort_key(self):
        return (self.world, self.entity or "", self.property or "")

    def __str__(self):
        return ".".join(render_name(part) for part in self.as_tuple())


@dataclass(frozen=True)
class TransitionDescription:
    name: str
    semantics: str
    source: str


@dataclass(frozen=True)
class ResultStructure:
    updates: Tuple = ()
    cont: bool = True


@dataclass(frozen=True)
class Ready:
    kind = "ready"


@dataclass(frozen=True)
class Suspended:
    resume_tick: int
    cursor: str
    kind = "suspended"


@dataclass(frozen=True)
class Awaiting:
    target: Path
    cursor: str
    # (iteration, begin_tick) of the awaited process, once observed
    seen: Optional[Tuple[int, int]] = None
    kind = "awaiting"


@dataclass(frozen=True)
class FinishedPending:
    result: ResultStructure
    kind = "finished"


READY = Ready()


# What one segment of a process produced. `emitted` holds the intermediate
# updates the segment committed before it stopped.
@dataclass(frozen=True)
class SuspendUntil:
    tick: int
    cursor: str
    emitted: Tuple = ()


@dataclass(frozen=True)
class AwaitProcess:
    target: Path
    cursor: str
    emitted: Tuple = ()


@dataclass(frozen=True)
class Finished:
    result: ResultStructure
    emitted: Tuple = ()


@dataclass(frozen=True)
class Process:
    name: str
    transition: str
    begin_tick: int = 0
    iteration: int = 0
    state: object = READY

    @property
    def cursor(self):
        return getattr(self.state, "cursor", None)

    def identity(self):
        return (self.iteration, self.begin_tick)

    def restarted(self, tick, iteration=None):
        return replace(
            self,
            begin_tick=tick,
            iteration=self.iteration if iteration is None else iteration,
            state=READY,
        )


@dataclass
class Entity:
    name: str
    data: Dict[str, object] = field(default_factory=dict)
    transitions: Dict[str, TransitionDescription] = field(default_factory=dict)
    processes: Dict[str, Process] = field(default_factory=dict)

    def copy(self):
        return Entity(self.name, dict(self.data), dict(self.transitions), dict(self.processes))

    def property_kind(self, key):
        if key in self.data:
            return DATA
        if key in self.transitions:
            return TRANSITION
        if key in self.processes:
            return PROCESS
        return None

    def get_property(self, key):
        # Disjointness makes the lookup order irrelevant; D, then T, then P.
        if key in self.data:
            return self.data[key]
        if key in self.transitions:
            return self.transitions[key]
        if key in self.processes:
            return self.processes[key]
        raise KeyError(key)

    def property_names(self):
        return set(self.data) | set(self.transitions) | set(self.processes)


@dataclass
class World:
    name: str
    entities: Dict[str, Entity] = field(default_factory=dict)

    def copy(self):
        return World(self.name, dict(self.entities))


@dataclass
class Configuration:
    worlds: Dict[str, World] = field(default_factory=dict)
    tick: int = 0

    def copy(self):
        return Configuration(dict(self.worlds), self.tick)

    def get_entity(self, world, entity):
        found = self.worlds.get(world)
        if found is None:
            return None
        return found.entities.get(entity)

    def iter_processes(self):
        """Yield (world, entity, process) in lexicographic order."""
        for world_name in sorted(self.worlds):
            world = self.worlds[world_name]
            for entity_name in sorted(world.entities):
                entity = world.entities[entity_name]
                for process_name in sorted(entity.processes):
                    yield world, entity, entity.processes[process_name]

    def count_processes(self):
        return sum(
            len(entity.processes)
            for world in self.worlds.values()
            for entity in world.entities.values()
        )


def resolve_path(config, path):
    """
    Return the item that `path` denotes in `config`: a World, an Entity,
    a data value, a TransitionDescription or a Process.
    """
    path = Path.parse(path)
    world = config.worlds.get(path.world)
    if world is None:
        raise NotFound("world", path)
    if path.entity is None:
        return world
    entity = world.entities.get(path.entity)
    if entity is None:
        raise NotFound("entity", path)
    if path.property is None:
        return entity
    try:
        return entity.get_property(path.property)
    except KeyError:
        raise NotFound("property", path)


def path_exists(config, path):
    try:
        resolve_path(config, path)
    except NotFound:
        return False
    return True


@dataclass(frozen=True)
class Violation:
    severity: str  # "error" or "warning"
    kind: str
    path: str
    message: str

    def __str__(self):
        return "%s %s at %s: %s" % (self.severity, self.kind, self.path, self.message)


def _references(value):
    if isinstance(value, (EntityRef, WorldRef)):
        yield value
    elif isinstance(value, tuple):
        for item in value:
            yield from _references(item)


def validate_configuration(config):
    """Return every violation found in `config`; an empty list means valid."""
    violations = []

    def add(severity, kind, path, message):
        violations.append(Violation(severity, kind, str(path), message))

    for world_key in sorted(config.worlds):
        world = config.worlds[world_key]
        if not is_valid_name(world_key) or world.name != world_key:
            add(
                "error",
                "InvalidName",
                world_key,
                "world is stored under %r but named %r" % (world_key, world.name),
            )
        for entity_key in sorted(world.entities):
            entity = world.entities[entity_key]
            entity_path = Path(world_key, entity_key) if is_valid_name(entity_key) else world_key
            if not is_valid_name(entity_key) or entity.name != entity_key:
                add(
                    "error",
                    "InvalidName",
                    entity_path,
                    "entity is stored under %r but named %r" % (entity_key, entity.name),
                )
                continue
            seen = {}
            for kind, mapping in (
                ("data", entity.data),
                ("transition", entity.transitions),
                ("process", entity.processes),
            ):
                for key in sorted(mapping):
                    if not is_valid_name(key):
                        add("error", "InvalidName", entity_path, "invalid property name %r" % (key,))
                        continue
                    path = Path(world_key, entity_key, key)
                    if key in seen:
                        add(
                            "error",
                            "DuplicateName",
                            path,
                            "%r is both a %s and a %s" % (key, seen[key], kind),
                        )
                    seen[key] = kind
            for key in sorted(entity.data):
                value = entity.data[key]
                path = Path(world_key, entity_key, key) if is_valid_name(key) else entity_path
                if not is_value(value):
                    add("error", "InvalidValue", path, "%r is not a value" % (value,))
                    continue
                for ref in _references(value):
                    if isinstance(ref, EntityRef) and ref.name not in world.entities:
                        add(
                            "warning",
                            "DanglingRef",
                            path,
                            "no entity %r in world %r" % (ref.name, world_key),
                        )
                    elif isinstance(ref, WorldRef) and ref.name not in config.worlds:
                        add("warning", "DanglingRef", path, "no world %r" % ref.name)
            for key in sorted(entity.transitions):
                transition = entity.transitions[key]
                if transition.name != key:
                    add(
                        "error",
                        "InvalidName",
                        Path(world_key, entity_key, key),
                        "transition named %r" % transition.name,
                    )
            for key in sorted(entity.processes):
                process = entity.processes[key]
                path = Path(world_key, entity_key, key)
                if process.name != key:
                    add("error", "InvalidName", path, "process named %r" % process.name)
                if process.transition not in entity.transitions:
                    add("warning", "UnresolvedTransition", path, "no transition %r" % process.transition)
                # resume_tick == tick is a process due right now
                if isinstance(process.state, Suspended) and process.state.resume_tick < config.tick:
                    add(
                        "error",
                        "StaleSuspension",
                        path,
                        "resumes at tick %d but the configuration is at tick %d"
                        % (process.state.resume_tick, config.tick),
                    )
    return violations


def errors_only(violations):
    return [violation for violation in violations if violation.severity == "error"]


def clone_world(config, source, target):
    """
    Return a new configuration holding a copy of world `source` under the
    name `target`. Data and transitions are copied verbatim; processes are
    restarted (Ready at the next tick, iteration kept). `config` is not
    modified.
    """
    if source not in config.worlds:
        raise SourceMissing("Cannot copy world %r: it does not exist" % source)
    if target in config.worlds:
        raise TargetExists("Cannot copy world %r to %r: %r exists" % (source, target, target))
    result = config.copy()
    result.worlds[target] = copy_world(config.worlds[source], target, config.tick + 1)
    return result


def copy_world(world, name, begin_tick):
    copied = World(name)
    for entity_name, entity in world.entities.items():
        clone = entity.copy()
        clone.processes = {
            process_name: process.restarted(begin_tick)
            for process_name, process in entity.processes.items()
        }
        copied.entities[entity_name] = clone
    return copied


def check_invariants(config):
    """Assert the invariants every configuration must keep (debug runs)."""
    problems = [
        violation
        for violation in validate_configuration(config)
        if violation.kind in ("DuplicateName", "InvalidName")
    ]
    assert not problems, "Invariant broken at tick %d: %s" % (
        config.tick,
        "; ".join(str(problem) for problem in problems),
    )
