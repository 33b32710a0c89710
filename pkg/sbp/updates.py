"""
The update algebra and the update function.

Transitions never change a configuration directly; they return updates,
which are collected per target entity into buckets during a tick and
committed together when the tick closes. Three kinds of update exist:

* core updates (`SetData`, `StartProcess`, `AddWorld`, ...), which the
  update function knows how to apply;
* `Macro` updates, named by the scenario and expanded into core updates
  before commit (see `sbp.macros`);
* `Guarded` updates, a core update that only commits if a predicate holds
  on the snapshot the tick started from.

Every update has a canonical one-line text form (`render_update`) that is
also accepted back by `parse_update`; traces, replay hashes and the external
driver protocol all use it.
"""
import enum
import logging
import operator
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from .exceptions import NotFound, TickAborted
from .model import (
    READY,
    Entity,
    Path,
    Process,
    TransitionDescription,
    World,
    copy_world,
    resolve_path,
)
from .tdl import lexer
from .tdl.lexer import tokenize
from .utils import render_name
from .values import (
    Coord,
    EntityRef,
    WorldRef,
    render_value,
    type_name,
    values_equal,
)

logger = logging.getLogger(__name__)

CONFLICT = "Conflict"
GUARD_FAILED = "GuardFailed"
TARGET_MISSING = "TargetMissing"
EXPANSION_FAILURE = "ExpansionFailure"


class ConflictPolicy(enum.Enum):
    LAST_WRITER_WINS = "LastWriterWins"
    FIRST_WINS = "FirstWins"
    DROP_CONFLICTING = "DropConflicting"
    FAIL_TICK = "FailTick"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        for policy in cls:
            if value in (policy.value, policy.name):
                return policy
        raise ValueError(
            "Unknown conflict policy %r; expected one of %s"
            % (value, ", ".join(policy.value for policy in cls))
        )


def _prop(world, entity, key):
    return "%s.%s.%s" % (render_name(world), render_name(entity), render_name(key))


def _ent(world, entity):
    return "%s.%s" % (render_name(world), render_name(entity))


#################
# Core updates  #
#################
class CoreUpdate(object):
    """Base class of the updates the update function applies directly."""

    destructive = False

    def target(self):
        """The (world, entity) bucket this update belongs to; entity is
        None for world-level updates."""
        return (self.world, self.entity)

    def written_keys(self, config):
        return frozenset()


@dataclass(frozen=True)
class SetData(CoreUpdate):
    world: str
    entity: str
    key: str
    value: object

    def written_keys(self, config):
        return frozenset([("property", self.key)])

    def render(self):
        return "set_data %s = %s" % (_prop(self.world, self.entity, self.key), render_value(self.value))


@dataclass(frozen=True)
class DeleteData(CoreUpdate):
    world: str
    entity: str
    key: str

    def written_keys(self, config):
        return frozenset([("property", self.key)])

    def render(self):
        return "delete_data %s" % _prop(self.world, self.entity, self.key)


@dataclass(frozen=True)
class SetTransition(CoreUpdate):
    world: str
    entity: str
    key: str
    transition: TransitionDescription

    def written_keys(self, config):
        return frozenset([("property", self.key)])

    def render(self):
        return "set_transition %s = %s %s" % (
            _prop(self.world, self.entity, self.key),
            render_name(self.transition.semantics),
            render_value(self.transition.source),
        )


@dataclass(frozen=True)
class DeleteTransition(CoreUpdate):
    world: str
    entity: str
    key: str

    def written_keys(self, config):
        return frozenset([("property", self.key)])

    def render(self):
        return "delete_transition %s" % _prop(self.world, self.entity, self.key)


@dataclass(frozen=True)
class StartProcess(CoreUpdate):
    world: str
    entity: str
    process: str
    transition: str

    def written_keys(self, config):
        return frozenset([("property", self.process)])

    def render(self):
        return "start_process %s <- %s" % (
            _prop(self.world, self.entity, self.process),
            render_name(self.transition),
        )


@dataclass(frozen=True)
class CancelProcess(CoreUpdate):
    world: str
    entity: str
    process: str

    def written_keys(self, config):
        return frozenset([("property", self.process)])

    def render(self):
        return "cancel_process %s" % _prop(self.world, self.entity, self.process)


@dataclass(frozen=True)
class RebindProcess(CoreUpdate):
    world: str
    entity: str
    process: str
    transition: str

    def written_keys(self, config):
        return frozenset([("property", self.process)])

    def render(self):
        return "rebind_process %s <- %s" % (
            _prop(self.world, self.entity, self.process),
            render_name(self.transition),
        )


@dataclass(frozen=True)
class CreateEntity(CoreUpdate):
    world: str
    entity: str

    def written_keys(self, config):
        return frozenset([("entity",)])

    def render(self):
        return "create_entity %s" % _ent(self.world, self.entity)


@dataclass(frozen=True)
class DeleteEntity(CoreUpdate):
    world: str
    entity: str

    destructive = True

    def written_keys(self, config):
        return frozenset([("entity",)])

    def render(self):
        return "delete_entity %s" % _ent(self.world, self.entity)


@dataclass(frozen=True)
class AddWorld(CoreUpdate):
    world: str
    copy_from: Optional[str] = None

    def target(self):
        return (self.world, None)

    def written_keys(self, config):
        return frozenset([("world",)])

    def render(self):
        if self.copy_from is None:
            return "add_world %s" % render_name(self.world)
        return "add_world %s from %s" % (render_name(self.world), render_name(self.copy_from))


@dataclass(frozen=True)
class DeleteWorld(CoreUpdate):
    world: str

    destructive = True

    def target(self):
        return (self.world, None)

    def written_keys(self, config):
        return frozenset([("world",)])

    def render(self):
        return "delete_world %s" % render_name(self.world)


@dataclass(frozen=True)
class CopyProperties(CoreUpdate):
    """Copy data entries and transition descriptions (never processes) from
    one entity to another, possibly across worlds. `keys` None copies all."""

    src_world: str
    src_entity: str
    world: str
    entity: str
    keys: Optional[Tuple[str, ...]] = None

    def copied_keys(self, config):
        source = config.get_entity(self.src_world, self.src_entity)
        if source is None:
            return ()
        available = set(source.data) | set(source.transitions)
        if self.keys is None:
            return tuple(sorted(available))
        return tuple(key for key in self.keys if key in available)

    def written_keys(self, config):
        return frozenset(("property", key) for key in self.copied_keys(config))

    def render(self):
        if self.keys is None:
            selection = "*"
        else:
            selection = "[%s]" % ",".join(render_name(key) for key in self.keys)
        return "copy_properties %s -> %s %s" % (
            _ent(self.src_world, self.src_entity),
            _ent(self.world, self.entity),
            selection,
        )


CORE_UPDATES = (
    SetData,
    DeleteData,
    SetTransition,
    DeleteTransition,
    StartProcess,
    CancelProcess,
    RebindProcess,
    CreateEntity,
    DeleteEntity,
    AddWorld,
    DeleteWorld,
    CopyProperties,
)


##########
# Guards #
##########
def _read_data(snapshot, path):
    try:
        value = resolve_path(snapshot, path)
    except NotFound:
        return False, None
    if isinstance(value, (World, Entity, TransitionDescription, Process)):
        return False, None
    return True, value


@dataclass(frozen=True)
class Exists:
    path: Path

    def holds(self, snapshot):
        try:
            resolve_path(snapshot, self.path)
        except NotFound:
            return False
        return True

    def render(self):
        return "exists %s" % self.path


@dataclass(frozen=True)
class NotExists:
    path: Path

    def holds(self, snapshot):
        return not Exists(self.path).holds(snapshot)

    def render(self):
        return "missing %s" % self.path


@dataclass(frozen=True)
class Equals:
    path: Path
    value: object

    def holds(self, snapshot):
        found, value = _read_data(snapshot, self.path)
        return found and values_equal(value, self.value)

    def render(self):
        return "%s == %s" % (self.path, render_value(self.value))


COMPARISONS = {
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
    "!=": operator.ne,
}


@dataclass(frozen=True)
class Compare:
    path: Path
    op: str
    value: object

    def holds(self, snapshot):
        found, value = _read_data(snapshot, self.path)
        if not found:
            return False
        if self.op == "!=":
            return not values_equal(value, self.value)
        kinds = {type_name(value), type_name(self.value)}
        if not (kinds <= {"Int", "Float"} or kinds == {"Text"}):
            return False
        return COMPARISONS[self.op](value, self.value)

    def render(self):
        return "%s %s %s" % (self.path, self.op, render_value(self.value))


################################
# Macro and guarded wrappers   #
################################
@dataclass(frozen=True)
class Macro:
    name: str
    args: Tuple = ()

    def render(self):
        if not self.args:
            return render_name(self.name)
        return "%s(%s)" % (render_name(self.name), ",".join(render_value(arg) for arg in self.args))


@dataclass(frozen=True)
class Guarded:
    guard: object
    inner: CoreUpdate

    def target(self):
        return self.inner.target()

    def render(self):
        return "when %s do %s" % (self.guard.render(), self.inner.render())


def render_update(update):
    return update.render()


class _TextReader(object):
    """Token cursor over the canonical update text."""

    def __init__(self, text):
        tokens, diagnostics = tokenize(text)
        if diagnostics:
            raise ValueError(str(diagnostics[0]))
        self.tokens = tokens
        self.pos = 0
        self.text = text

    @property
    def tok(self):
        return self.tokens[self.pos]

    def fail(self, expected):
        raise ValueError("%r: expected %s at %s, found %s" % (self.text, expected, self.tok.span, self.tok))

    def next(self):
        tok = self.tok
        self.pos += 1
        return tok

    def op(self, value):
        if not self.tok.is_op(value):
            self.fail("'%s'" % value)
        self.next()

    def accept(self, value):
        if self.tok.is_op(value):
            self.next()
            return True
        return False

    def name(self):
        if self.tok.kind not in (lexer.NAME, lexer.STRING):
            self.fail("a name")
        return self.next().value

    def path(self, segments):
        parts = [self.name()]
        while len(parts) < segments:
            self.op(".")
            parts.append(self.name())
        return parts

    def any_path(self):
        parts = [self.name()]
        while len(parts) < 3 and self.accept("."):
            parts.append(self.name())
        return Path(*parts)

    def value(self):
        tok = self.tok
        if tok.is_op("-"):
            self.next()
            if self.tok.kind in (lexer.INT, lexer.FLOAT):
                return -self.next().value
            if self.tok.is_word("inf"):
                self.next()
                return float("-inf")
            self.fail("a number")
        if tok.kind in (lexer.INT, lexer.FLOAT, lexer.STRING):
            return self.next().value
        if tok.kind == lexer.NAME:
            word = self.next().value
            constants = {
                "unit": None,
                "true": True,
                "false": False,
                "inf": float("inf"),
                "nan": float("nan"),
            }
            if word in constants:
                return constants[word]
            if word in ("ref", "wref"):
                self.op("(")
                name = self.name()
                self.op(")")
                return EntityRef(name) if word == "ref" else WorldRef(name)
            self.pos -= 1
            self.fail("a value")
        if self.accept("("):
            x = self.value()
            self.op(",")
            y = self.value()
            self.op(")")
            if type(x) is not int or type(y) is not int:
                raise ValueError("%r: coordinates must be integers" % self.text)
            return Coord(x, y)
        if self.accept("["):
            items = []
            if not self.accept("]"):
                items.append(self.value())
                while self.accept(","):
                    items.append(self.value())
                self.op("]")
            return tuple(items)
        self.fail("a value")

    def end(self):
        if self.tok.kind != lexer.EOF:
            self.fail("end of update")


def _read_core(reader):
    kind = reader.name()
    if kind in ("set_data", "set_transition"):
        world, entity, key = reader.path(3)
        reader.op("=")
        if kind == "set_data":
            return SetData(world, entity, key, reader.value())
        semantics = reader.name()
        if reader.tok.kind != lexer.STRING:
            reader.fail("the transition source")
        source = reader.next().value
        return SetTransition(world, entity, key, TransitionDescription(key, semantics, source))
    if kind in ("start_process", "rebind_process"):
        world, entity, key = reader.path(3)
        reader.op("<-")
        cls = StartProcess if kind == "start_process" else RebindProcess
        return cls(world, entity, key, reader.name())
    simple = {
        "delete_data": (DeleteData, 3),
        "delete_transition": (DeleteTransition, 3),
        "cancel_process": (CancelProcess, 3),
        "create_entity": (CreateEntity, 2),
        "delete_entity": (DeleteEntity, 2),
        "delete_world": (DeleteWorld, 1),
    }
    if kind in simple:
        cls, segments = simple[kind]
        return cls(*reader.path(segments))
    if kind == "add_world":
        world = reader.name()
        source = None
        if reader.tok.is_word("from"):
            reader.next()
            source = reader.name()
        return AddWorld(world, source)
    if kind == "copy_properties":
        src_world, src_entity = reader.path(2)
        reader.op("->")
        world, entity = reader.path(2)
        if reader.accept("*"):
            return CopyProperties(src_world, src_entity, world, entity, None)
        reader.op("[")
        keys = []
        if not reader.accept("]"):
            keys.append(reader.name())
            while reader.accept(","):
                keys.append(reader.name())
            reader.op("]")
        return CopyProperties(src_world, src_entity, world, entity, tuple(keys))
    reader.pos -= 1
    reader.fail("a core update")


def _read_guard(reader):
    if reader.tok.is_word("exists", "missing"):
        word = reader.next().value
        path = reader.any_path()
        return Exists(path) if word == "exists" else NotExists(path)
    path = reader.any_path()
    if not reader.tok.is_op("==", "!=", "<", "<=", ">", ">="):
        reader.fail("a comparison")
    op = reader.next().value
    value = reader.value()
    return Equals(path, value) if op == "==" else Compare(path, op, value)


CORE_WORDS = (
    "set_data",
    "delete_data",
    "set_transition",
    "delete_transition",
    "start_process",
    "cancel_process",
    "rebind_process",
    "create_entity",
    "delete_entity",
    "add_world",
    "delete_world",
    "copy_properties",
)


def parse_update(text):
    """Parse the canonical text of an update. Raises ValueError."""
    reader = _TextReader(text)
    if reader.tok.is_word("when"):
        reader.next()
        guard = _read_guard(reader)
        if not reader.tok.is_word("do"):
            reader.fail("'do'")
        reader.next()
        update = Guarded(guard, _read_core(reader))
    elif reader.tok.is_word(*CORE_WORDS):
        update = _read_core(reader)
    else:
        name = reader.name()
        args = []
        if reader.accept("("):
            if not reader.accept(")"):
                args.append(reader.value())
                while reader.accept(","):
                    args.append(reader.value())
                reader.op(")")
        update = Macro(name, tuple(args))
    reader.end()
    return update


###########
# Buckets #
###########
@dataclass(frozen=True)
class BucketEntry:
    emitter: Path
    seq: int
    update: object
    sub: int = 0

    def sort_key(self):
        return (self.emitter.sort_key(), self.seq, self.sub)

    def render(self):
        return self.update.render()


@dataclass
class UpdateBucket:
    key: Tuple[str, Optional[str]]
    entries: List[BucketEntry] = field(default_factory=list)

    @property
    def is_world_level(self):
        return self.key[1] is None


@dataclass(frozen=True)
class DroppedUpdate:
    entry: BucketEntry
    reason: str
    detail: str = ""


@dataclass
class CommitReport:
    """Collects what `apply_all` committed and dropped, in commit order."""

    committed: List[BucketEntry] = field(default_factory=list)
    dropped: List[DroppedUpdate] = field(default_factory=list)


def collect_buckets(entries):
    """Group expanded entries into buckets keyed by their target."""
    buckets = {}
    for entry in entries:
        key = entry.update.target()
        buckets.setdefault(key, UpdateBucket(key)).entries.append(entry)
    return list(buckets.values())


def _core_of(update):
    return update.inner if isinstance(update, Guarded) else update


def _conflicts(a_keys, a_core, b_keys, b_core):
    if isinstance(a_core, DeleteEntity) or isinstance(b_core, DeleteEntity):
        return True
    return bool(a_keys & b_keys)


def resolve_conflicts(entries, config, policy, tick):
    """
    Split guard-passed, sorted `entries` into survivors and conflict drops
    according to `policy`.
    """
    keyed = [(entry, _core_of(entry.update).written_keys(config)) for entry in entries]
    if policy is ConflictPolicy.FAIL_TICK or policy is ConflictPolicy.DROP_CONFLICTING:
        clashing = set()
        pairs = []
        for i, (a, a_keys) in enumerate(keyed):
            for b, b_keys in keyed[i + 1:]:
                if _conflicts(a_keys, _core_of(a.update), b_keys, _core_of(b.update)):
                    clashing.add(id(a))
                    clashing.add(id(b))
                    pairs.append((a, b))
        if pairs and policy is ConflictPolicy.FAIL_TICK:
            raise TickAborted(tick, pairs)
        survivors = [entry for entry, _ in keyed if id(entry) not in clashing]
        dropped = [
            DroppedUpdate(entry, CONFLICT, "conflicts with another update")
            for entry, _ in keyed
            if id(entry) in clashing
        ]
        return survivors, dropped

    # Greedy in priority order: the first kept entry of a conflicting group wins.
    ordered = keyed if policy is ConflictPolicy.FIRST_WINS else list(reversed(keyed))
    kept = []
    dropped = []
    for entry, keys in ordered:
        rival = None
        for other, other_keys in kept:
            if _conflicts(keys, _core_of(entry.update), other_keys, _core_of(other.update)):
                rival = other
                break
        if rival is None:
            kept.append((entry, keys))
        else:
            dropped.append(DroppedUpdate(entry, CONFLICT, "lost to %s" % rival.render()))
    kept_ids = {id(entry) for entry, _ in kept}
    survivors = [entry for entry, _ in keyed if id(entry) in kept_ids]
    dropped.sort(key=lambda drop: drop.entry.sort_key())
    return survivors, dropped


#######################
# The update function #
#######################
class _Transaction(object):
    """Copy-on-write view of the configuration being built for the next tick."""

    def __init__(self, config, snapshot):
        self.config = config.copy()
        self.snapshot = snapshot
        self.next_tick = snapshot.tick + 1
        self._own_worlds = set()
        self._own_entities = set()

    def world(self, name):
        world = self.config.worlds.get(name)
        if world is None:
            return None
        if name not in self._own_worlds:
            world = world.copy()
            self.config.worlds[name] = world
            self._own_worlds.add(name)
        return world

    def entity(self, world_name, name):
        if self.config.get_entity(world_name, name) is None:
            return None
        world = self.world(world_name)
        key = (world_name, name)
        if key not in self._own_entities:
            world.entities[name] = world.entities[name].copy()
            self._own_entities.add(key)
        return world.entities[name]

    def add_world(self, world):
        self.config.worlds[world.name] = world
        self._own_worlds.add(world.name)
        for entity_name in world.entities:
            self._own_entities.add((world.name, entity_name))

    def drop_world(self, name):
        del self.config.worlds[name]
        self._own_worlds.discard(name)
        self._own_entities = {key for key in self._own_entities if key[0] != name}


def _apply_core(txn, core):
    """Apply one core update. Return None, or (reason, detail) if it was dropped."""
    if isinstance(core, AddWorld):
        if core.world in txn.config.worlds:
            return CONFLICT, "world %s exists" % render_name(core.world)
        if core.copy_from is None:
            txn.add_world(World(core.world))
        else:
            source = txn.config.worlds.get(core.copy_from)
            if source is None:
                return TARGET_MISSING, "no world %s to copy" % render_name(core.copy_from)
            txn.add_world(copy_world(source, core.world, txn.next_tick))
        return None

    if isinstance(core, DeleteWorld):
        if core.world not in txn.config.worlds:
            return TARGET_MISSING, "no world %s" % render_name(core.world)
        txn.drop_world(core.world)
        return None

    if isinstance(core, CreateEntity):
        world = txn.world(core.world)
        if world is None:
            return TARGET_MISSING, "no world %s" % render_name(core.world)
        if core.entity in world.entities:
            return CONFLICT, "entity exists"
        world.entities[core.entity] = Entity(core.entity)
        txn._own_entities.add((core.world, core.entity))
        return None

    if isinstance(core, DeleteEntity):
        world = txn.world(core.world)
        if world is None or core.entity not in world.entities:
            return TARGET_MISSING, "no entity %s" % _ent(core.world, core.entity)
        del world.entities[core.entity]
        txn._own_entities.discard((core.world, core.entity))
        return None

    if isinstance(core, CopyProperties):
        # Sources are read as they were when the tick opened.
        source = txn.snapshot.get_entity(core.src_world, core.src_entity)
        if source is None:
            return TARGET_MISSING, "no entity %s" % _ent(core.src_world, core.src_entity)
        keys = core.copied_keys(txn.snapshot)
        entity = txn.entity(core.world, core.entity)
        if entity is None:
            return TARGET_MISSING, "no entity %s" % _ent(core.world, core.entity)
        for key in keys:
            if key in source.data:
                if key in entity.transitions or key in entity.processes:
                    continue
                entity.data[key] = source.data[key]
            else:
                if key in entity.data or key in entity.processes:
                    continue
                entity.transitions[key] = source.transitions[key]
        return None

    entity = txn.entity(core.world, core.entity)
    if entity is None:
        return TARGET_MISSING, "no entity %s" % _ent(core.world, core.entity)

    if isinstance(core, SetData):
        if core.key in entity.transitions or core.key in entity.processes:
            return CONFLICT, "%s is not a data entry" % render_name(core.key)
        entity.data[core.key] = core.value
    elif isinstance(core, DeleteData):
        if core.key not in entity.data:
            return TARGET_MISSING, "no data entry %s" % render_name(core.key)
        del entity.data[core.key]
    elif isinstance(core, SetTransition):
        if core.key in entity.data or core.key in entity.processes:
            return CONFLICT, "%s is not a transition" % render_name(core.key)
        transition = core.transition
        if transition.name != core.key:
            transition = TransitionDescription(core.key, transition.semantics, transition.source)
        entity.transitions[core.key] = transition
    elif isinstance(core, DeleteTransition):
        if core.key not in entity.transitions:
            return TARGET_MISSING, "no transition %s" % render_name(core.key)
        del entity.transitions[core.key]
    elif isinstance(core, StartProcess):
        if core.transition not in entity.transitions:
            return TARGET_MISSING, "no transition %s" % render_name(core.transition)
        if core.process in entity.processes:
            return CONFLICT, "process %s is already running" % render_name(core.process)
        if core.process in entity.data or core.process in entity.transitions:
            return CONFLICT, "%s names another property" % render_name(core.process)
        entity.processes[core.process] = Process(core.process, core.transition, txn.next_tick, 0, READY)
    elif isinstance(core, CancelProcess):
        if core.process not in entity.processes:
            return TARGET_MISSING, "no process %s" % render_name(core.process)
        del entity.processes[core.process]
    elif isinstance(core, RebindProcess):
        process = entity.processes.get(core.process)
        if process is None:
            return TARGET_MISSING, "no process %s" % render_name(core.process)
        if process.transition == core.transition:
            return None
        entity.processes[core.process] = Process(
            process.name, core.transition, txn.next_tick, process.iteration, READY
        )
    else:
        raise TypeError("%r is not a core update" % (core,))
    return None


def _prepare(bucket, txn, snapshot, policy):
    """Guard check and conflict resolution; returns (ordered survivors, dropped)."""
    dropped = []
    passed = []
    for entry in sorted(bucket.entries, key=BucketEntry.sort_key):
        update = entry.update
        if isinstance(update, Macro):
            raise TypeError("Bucket entries must be expanded before commit: %s" % update.render())
        if isinstance(update, Guarded) and not update.guard.holds(snapshot):
            dropped.append(DroppedUpdate(entry, GUARD_FAILED, update.guard.render()))
            continue
        passed.append(entry)
    survivors, conflicts = resolve_conflicts(passed, snapshot, policy, snapshot.tick)
    dropped.extend(conflicts)
    # Destructive updates go last so "notify, then delete" reads naturally.
    survivors.sort(key=lambda entry: _core_of(entry.update).destructive)
    return survivors, dropped


def _commit(txn, survivors, report):
    for entry in survivors:
        outcome = _apply_core(txn, _core_of(entry.update))
        if outcome is None:
            report.committed.append(entry)
        else:
            reason, detail = outcome
            report.dropped.append(DroppedUpdate(entry, reason, detail))


def apply_bucket(config, bucket, snapshot, policy=ConflictPolicy.LAST_WRITER_WINS):
    """
    Commit one fully expanded bucket onto `config`; return the new
    configuration and the list of DroppedUpdate. `config` is not modified.
    """
    policy = ConflictPolicy.parse(policy)
    txn = _Transaction(config, snapshot)
    report = CommitReport()
    survivors, dropped = _prepare(bucket, txn, snapshot, policy)
    report.dropped.extend(dropped)
    _commit(txn, survivors, report)
    return txn.config, report.dropped


def apply_all(config, buckets, snapshot, policy=ConflictPolicy.LAST_WRITER_WINS, report=None):
    """
    Fold every bucket of a closing tick into the configuration of the next
    tick: world additions first, then entity buckets by (world, entity),
    then world deletions. Pass a CommitReport to learn what was committed
    and dropped.
    """
    policy = ConflictPolicy.parse(policy)
    if report is None:
        report = CommitReport()
    txn = _Transaction(config, snapshot)

    world_buckets = sorted((b for b in buckets if b.is_world_level), key=lambda b: b.key[0])
    entity_buckets = sorted((b for b in buckets if not b.is_world_level), key=lambda b: b.key)

    deletions = []
    for bucket in world_buckets:
        survivors, dropped = _prepare(bucket, txn, snapshot, policy)
        report.dropped.extend(dropped)
        _commit(txn, [e for e in survivors if not _core_of(e.update).destructive], report)
        deletions.extend(e for e in survivors if _core_of(e.update).destructive)

    for bucket in entity_buckets:
        survivors, dropped = _prepare(bucket, txn, snapshot, policy)
        report.dropped.extend(dropped)
        _commit(txn, survivors, report)

    _commit(txn, deletions, report)

    for drop in report.dropped:
        logger.debug("Dropped %s (%s: %s)", drop.entry.render(), drop.reason, drop.detail)
    txn.config.tick = config.tick + 1
    return txn.config


__all__ = [
    "AddWorld",
    "BucketEntry",
    "CancelProcess",
    "CommitReport",
    "Compare",
    "ConflictPolicy",
    "CopyProperties",
    "CreateEntity",
    "DeleteData",
    "DeleteEntity",
    "DeleteTransition",
    "DeleteWorld",
    "DroppedUpdate",
    "Equals",
    "Exists",
    "Guarded",
    "Macro",
    "NotExists",
    "RebindProcess",
    "SetData",
    "SetTransition",
    "StartProcess",
    "UpdateBucket",
    "apply_all",
    "apply_bucket",
    "collect_buckets",
    "parse_update",
    "render_update",
    # re-exported for convenience
    "Coord",
    "EntityRef",
    "WorldRef",
]
