"""
Runs one segment of a TDL program.

A segment starts at the program's beginning or at a resume position and
ends at the first `wait`, `await` or `return`, or when the program runs
out of statements. Everything a segment reads comes from the snapshot it is
given, so running the same segment twice gives the same outcome.

Paths are evaluated lazily. `me`, `myworld`, `world(x)`, binders that hold
entities, attribute access and indexing all produce handles; a handle is
only looked up in the snapshot when its value is needed. This lets an
update name an entity or world that does not exist yet.

Resume positions are lists of integers: the statement index in the
outermost block, then for each compound statement on the way down the
number of the branch taken (see `nodes.child_blocks`) and the statement
index inside it. The position always points at the statement after the
one that suspended.
"""
import json
import math
from dataclasses import dataclass

from ..exceptions import MissingPath, RuntimeFault
from ..model import (
    AwaitProcess,
    Finished,
    Path,
    Process,
    ResultStructure,
    SuspendUntil,
    TransitionDescription,
)
from ..updates import (
    AddWorld,
    CancelProcess,
    Compare,
    CopyProperties,
    CreateEntity,
    DeleteData,
    DeleteEntity,
    DeleteTransition,
    DeleteWorld,
    Equals,
    Exists,
    Guarded,
    Macro,
    NotExists,
    RebindProcess,
    SetData,
    SetTransition,
    StartProcess,
)
from ..utils import is_valid_name
from ..values import (
    INT_MAX,
    INT_MIN,
    Coord,
    EntityRef,
    WorldRef,
    decode_value,
    encode_value,
    is_value,
    type_name,
    values_equal,
)
from . import nodes as n


@dataclass(frozen=True)
class WorldHandle:
    world: str

    def path(self):
        return Path(self.world)


@dataclass(frozen=True)
class EntityHandle:
    world: str
    entity: str

    def path(self):
        return Path(self.world, self.entity)


@dataclass(frozen=True)
class PropHandle:
    world: str
    entity: str
    key: str

    def path(self):
        return Path(self.world, self.entity, self.key)


HANDLES = (WorldHandle, EntityHandle, PropHandle)


@dataclass(frozen=True)
class Environment:
    """Who is running: the owning world and entity, the process and the tick."""

    world: str
    entity: str
    process: str = ""
    tick: int = 0


class _Finish(Exception):
    def __init__(self, result):
        self.result = result


class _Suspend(Exception):
    def __init__(self, kind, detail, position):
        self.kind = kind
        self.detail = detail
        self.position = position


def _describe(value):
    if isinstance(value, HANDLES):
        return str(value.path())
    if isinstance(value, TransitionDescription):
        return "transition %s" % value.name
    return type_name(value)


def _check_int(result, span):
    if isinstance(result, int) and not isinstance(result, bool):
        if not INT_MIN <= result <= INT_MAX:
            raise RuntimeFault(span, "integer overflow")
    return result


def _is_number(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool)


class Evaluator(object):
    """Evaluates expressions and update expressions against one snapshot."""

    def __init__(self, env, snapshot, rng=None, bindings=None, params=None):
        self.env = env
        self.snapshot = snapshot
        self.rng = rng
        self.bindings = dict(bindings or {})
        self.params = dict(params or {})

    # Snapshot access

    def lookup(self, handle, span):
        world = self.snapshot.worlds.get(handle.world)
        if world is None:
            raise MissingPath(span, "no world %s" % handle.world)
        if isinstance(handle, WorldHandle):
            return world
        entity = world.entities.get(handle.entity)
        if entity is None:
            raise MissingPath(span, "no entity %s" % handle.path())
        if isinstance(handle, EntityHandle):
            return entity
        try:
            return entity.get_property(handle.key)
        except KeyError:
            raise MissingPath(span, "no property %s" % handle.path())

    def read(self, handle, span):
        """Read a property handle; entity references stay values."""
        found = self.lookup(handle, span)
        if isinstance(found, Process):
            raise RuntimeFault(span, "%s is a process, not a value" % handle.path())
        return found

    def container(self, obj, span):
        """Turn what an expression produced into something `.` and `[]` can walk."""
        if isinstance(obj, PropHandle):
            value = self.read(obj, span)
            if isinstance(value, EntityRef):
                return EntityHandle(obj.world, value.name)
            if isinstance(value, WorldRef):
                return WorldHandle(value.name)
            return value
        if isinstance(obj, EntityRef):
            return EntityHandle(self.env.world, obj.name)
        if isinstance(obj, WorldRef):
            return WorldHandle(obj.name)
        return obj

    def to_value(self, obj, span):
        if isinstance(obj, EntityHandle):
            return EntityRef(obj.entity)
        if isinstance(obj, WorldHandle):
            return WorldRef(obj.world)
        if isinstance(obj, PropHandle):
            obj = self.read(obj, span)
        if isinstance(obj, TransitionDescription):
            raise RuntimeFault(span, "transition %s cannot be used as a value" % obj.name)
        return obj

    def materialize(self, obj, span):
        """What a `let` stores: property reads are taken now, handles stay."""
        if isinstance(obj, PropHandle):
            return self.read(obj, span)
        return obj

    # Expressions

    def ref(self, node):
        if isinstance(node, n.Literal):
            return node.value
        if isinstance(node, n.Me):
            return EntityHandle(self.env.world, self.env.entity)
        if isinstance(node, n.MyWorld):
            return WorldHandle(self.env.world)
        if isinstance(node, n.WorldCall):
            return self.world_handle(self.ref(node.name), node.span)
        if isinstance(node, n.Var):
            try:
                return self.bindings[node.name]
            except KeyError:
                raise RuntimeFault(node.span, "'%s' is not bound" % node.name)
        if isinstance(node, n.Param):
            try:
                return self.params[node.name]
            except KeyError:
                raise RuntimeFault(node.span, "no argument for $%s" % node.name)
        if isinstance(node, n.Attr):
            return self.attribute(node)
        if isinstance(node, n.Index):
            return self.index(node)
        if isinstance(node, n.CoordExpr):
            x, y = self.value(node.x), self.value(node.y)
            if type(x) is not int or type(y) is not int:
                raise RuntimeFault(node.span, "coordinates must be Ints")
            return Coord(x, y)
        if isinstance(node, n.ListExpr):
            return tuple(self.value(item) for item in node.items)
        if isinstance(node, n.Unary):
            return self.unary(node)
        if isinstance(node, n.Binary):
            return self.binary(node)
        if isinstance(node, n.Call):
            return self.call(node)
        if isinstance(node, n.Range):
            raise RuntimeFault(node.span, "a range is only allowed inside randomValue")
        raise RuntimeFault(getattr(node, "span", None), "cannot evaluate %r" % (node,))

    def value(self, node):
        return self.to_value(self.ref(node), node.span)

    def world_handle(self, obj, span):
        obj = self.container(obj, span)
        if isinstance(obj, WorldHandle):
            return obj
        if isinstance(obj, str) and is_valid_name(obj):
            return WorldHandle(obj)
        raise RuntimeFault(span, "%s does not name a world" % _describe(obj))

    def entity_handle(self, obj, span):
        obj = self.container(obj, span)
        if isinstance(obj, EntityHandle):
            return obj
        raise RuntimeFault(span, "%s does not name an entity" % _describe(obj))

    def prop_handle(self, obj, span):
        if isinstance(obj, PropHandle):
            return obj
        raise RuntimeFault(span, "%s does not name a property" % _describe(obj))

    def attribute(self, node):
        obj = self.container(self.ref(node.obj), node.span)
        if isinstance(obj, WorldHandle):
            return EntityHandle(obj.world, node.name)
        if isinstance(obj, EntityHandle):
            return PropHandle(obj.world, obj.entity, node.name)
        if isinstance(obj, Coord) and node.name in ("x", "y"):
            return getattr(obj, node.name)
        raise RuntimeFault(node.span, "%s has no part '%s'" % (_describe(obj), node.name))

    def index(self, node):
        obj = self.container(self.ref(node.obj), node.span)
        key = self.value(node.key)
        if isinstance(obj, WorldHandle):
            if isinstance(key, EntityRef):
                key = key.name
            if isinstance(key, str) and is_valid_name(key):
                return EntityHandle(obj.world, key)
        elif isinstance(obj, EntityHandle):
            if isinstance(key, str) and is_valid_name(key):
                return PropHandle(obj.world, obj.entity, key)
        elif isinstance(obj, tuple) and type(key) is int:
            if -len(obj) <= key < len(obj):
                return obj[key]
            raise RuntimeFault(node.span, "index %d out of range" % key)
        raise RuntimeFault(node.span, "cannot index %s with %s" % (_describe(obj), _describe(key)))

    def truth(self, node):
        value = self.value(node)
        if not isinstance(value, bool):
            raise RuntimeFault(node.span, "expected a Bool, got %s" % type_name(value))
        return value

    def unary(self, node):
        if node.op == "not":
            return not self.truth(node.operand)
        value = self.value(node.operand)
        if _is_number(value):
            return _check_int(-value, node.span)
        if isinstance(value, Coord):
            return Coord(-value.x, -value.y)
        raise RuntimeFault(node.span, "cannot negate %s" % type_name(value))

    def binary(self, node):
        op = node.op
        if op == "and":
            return self.truth(node.left) and self.truth(node.right)
        if op == "or":
            return self.truth(node.left) or self.truth(node.right)
        left = self.value(node.left)
        right = self.value(node.right)
        if op == "==":
            return values_equal(left, right)
        if op == "!=":
            return not values_equal(left, right)
        if op in ("<", "<=", ">", ">="):
            if not (
                (_is_number(left) and _is_number(right))
                or (isinstance(left, str) and isinstance(right, str))
            ):
                raise RuntimeFault(
                    node.span, "cannot compare %s with %s" % (type_name(left), type_name(right))
                )
            return {
                "<": left < right,
                "<=": left <= right,
                ">": left > right,
                ">=": left >= right,
            }[op]
        return _check_int(self.arithmetic(op, left, right, node.span), node.span)

    def arithmetic(self, op, left, right, span):
        if _is_number(left) and _is_number(right):
            if op == "+":
                return left + right
            if op == "-":
                return left - right
            if op == "*":
                return left * right
            if right == 0:
                raise RuntimeFault(span, "division by zero")
            both_ints = type(left) is int and type(right) is int
            if op == "/":
                return left // right if both_ints else left / right
            if op == "%":
                return left % right
        if isinstance(left, Coord) and isinstance(right, Coord) and op in ("+", "-"):
            return left + right if op == "+" else left - right
        if op == "+" and type_name(left) == type_name(right) and isinstance(left, (str, tuple)):
            return left + right
        raise RuntimeFault(
            span, "cannot apply %s to %s and %s" % (op, type_name(left), type_name(right))
        )

    def call(self, node):
        func, args = node.func, node.args
        if func == "exists":
            try:
                found = self.ref(args[0])
                if isinstance(found, HANDLES):
                    self.lookup(found, node.span)
                elif isinstance(found, EntityRef):
                    self.lookup(EntityHandle(self.env.world, found.name), node.span)
                elif isinstance(found, WorldRef):
                    self.lookup(WorldHandle(found.name), node.span)
            except MissingPath:
                return False
            return True
        if func == "randomValue":
            return self.random_value(node)
        values = [self.value(arg) for arg in args]
        if func == "abs":
            if not _is_number(values[0]):
                raise RuntimeFault(node.span, "abs needs a number")
            return _check_int(abs(values[0]), node.span)
        if func == "distance":
            a, b = values
            if not (isinstance(a, Coord) and isinstance(b, Coord)):
                raise RuntimeFault(node.span, "distance needs two Coords")
            return math.hypot(a.x - b.x, a.y - b.y)
        if func == "contains":
            collection, item = values
            if isinstance(collection, tuple):
                return any(values_equal(element, item) for element in collection)
            if isinstance(collection, str) and isinstance(item, str):
                return item in collection
            raise RuntimeFault(node.span, "contains needs a List or Text")
        if func == "len":
            if not isinstance(values[0], (tuple, str)):
                raise RuntimeFault(node.span, "len needs a List or Text")
            return len(values[0])
        if func in ("min", "max"):
            if len(values) == 1 and isinstance(values[0], tuple):
                values = list(values[0])
            if not values:
                raise RuntimeFault(node.span, "%s of nothing" % func)
            if not (all(_is_number(v) for v in values) or all(isinstance(v, str) for v in values)):
                raise RuntimeFault(node.span, "%s needs numbers or Texts" % func)
            return min(values) if func == "min" else max(values)
        raise RuntimeFault(node.span, "unknown built-in '%s'" % func)

    def random_value(self, node):
        if self.rng is None:
            raise RuntimeFault(node.span, "randomValue is not available here")
        arg = node.args[0]
        if isinstance(arg, n.Range):
            low, high = self.value(arg.low), self.value(arg.high)
        else:
            low, high = 1, self.value(arg)
        if type(low) is not int or type(high) is not int:
            raise RuntimeFault(node.span, "randomValue needs Int bounds")
        if high < low:
            raise RuntimeFault(node.span, "randomValue of an empty range %d..%d" % (low, high))
        return self.rng.randint(low, high)

    # Updates

    def transition(self, node):
        found = self.ref(node)
        if isinstance(found, PropHandle):
            found = self.read(found, node.span)
        if isinstance(found, TransitionDescription):
            return found
        raise RuntimeFault(node.span, "%s is not a transition" % _describe(found))

    def transition_name(self, node):
        # a bare unbound name after '<-' is the transition name itself
        if isinstance(node, n.Var) and node.name not in self.bindings:
            return node.name
        found = self.ref(node)
        if isinstance(found, PropHandle):
            found = self.read(found, node.span)
        if isinstance(found, TransitionDescription):
            return found.name
        if isinstance(found, str) and is_valid_name(found):
            return found
        raise RuntimeFault(node.span, "%s does not name a transition" % _describe(found))

    def guard(self, node):
        handle = self.ref(node.path)
        if isinstance(node, (n.GuardExists, n.GuardMissing)):
            if not isinstance(handle, HANDLES):
                handle = self.container(handle, node.span)
            if not isinstance(handle, HANDLES):
                raise RuntimeFault(node.span, "a guard needs a path")
            if isinstance(node, n.GuardExists):
                return Exists(handle.path())
            return NotExists(handle.path())
        path = self.prop_handle(handle, node.span).path()
        value = self.value(node.value)
        if node.op == "==":
            return Equals(path, value)
        return Compare(path, node.op, value)

    def update(self, node):
        if isinstance(node, n.MacroCall):
            return Macro(node.name, tuple(self.value(arg) for arg in node.args))
        if isinstance(node, n.GuardedExpr):
            return Guarded(self.guard(node.guard), self.core(node.core))
        return self.core(node)

    def core(self, node):
        kind = node.kind
        span = node.span
        if kind in ("add_world", "delete_world"):
            world = self.world_handle(self.ref(node.target), span).world
            if kind == "delete_world":
                return DeleteWorld(world)
            source = None
            if node.value is not None:
                source = self.world_handle(self.ref(node.value), span).world
            return AddWorld(world, source)
        if kind in ("create_entity", "delete_entity"):
            target = self.ref(node.target)
            if isinstance(target, PropHandle):
                raise RuntimeFault(span, "%s names a property, not an entity" % target.path())
            entity = self.entity_handle(target, span)
            cls = CreateEntity if kind == "create_entity" else DeleteEntity
            return cls(entity.world, entity.entity)
        if kind == "copy_properties":
            source = self.entity_handle(self.ref(node.target), span)
            destination = self.entity_handle(self.ref(node.value), span)
            keys = None
            if node.keys is not None:
                keys = []
                for key in node.keys:
                    name = self.value(key)
                    if not (isinstance(name, str) and is_valid_name(name)):
                        raise RuntimeFault(key.span, "property names must be Texts")
                    keys.append(name)
                keys = tuple(keys)
            return CopyProperties(
                source.world, source.entity, destination.world, destination.entity, keys
            )
        prop = self.prop_handle(self.ref(node.target), span)
        where = (prop.world, prop.entity, prop.key)
        if kind == "set_data":
            value = self.value(node.value)
            if not is_value(value):
                raise RuntimeFault(span, "%r is not a value" % (value,))
            return SetData(*where, value)
        if kind == "delete_data":
            return DeleteData(*where)
        if kind == "set_transition":
            return SetTransition(*where, self.transition(node.value))
        if kind == "delete_transition":
            return DeleteTransition(*where)
        if kind == "start_process":
            return StartProcess(*where, self.transition_name(node.value))
        if kind == "cancel_process":
            return CancelProcess(*where)
        if kind == "rebind_process":
            return RebindProcess(*where, self.transition_name(node.value))
        raise RuntimeFault(span, "unknown update %s" % kind)


#########
# Cursors
#########
def _encode_binding(value):
    if isinstance(value, EntityHandle):
        return {"handle": [value.world, value.entity]}
    if isinstance(value, WorldHandle):
        return {"handle": [value.world]}
    if isinstance(value, TransitionDescription):
        return {"transition": [value.name, value.semantics, value.source]}
    return {"value": encode_value(value)}


def _decode_binding(data):
    if "handle" in data:
        parts = data["handle"]
        return WorldHandle(parts[0]) if len(parts) == 1 else EntityHandle(parts[0], parts[1])
    if "transition" in data:
        return TransitionDescription(*data["transition"])
    return decode_value(data["value"])


def encode_cursor(position, bindings, draws):
    document = {
        "kind": "tdl",
        "position": list(position),
        "bindings": {name: _encode_binding(value) for name, value in bindings.items()},
        "draws": draws,
    }
    return json.dumps(document, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def decode_cursor(cursor):
    """Return (position, bindings, draws) from a cursor string."""
    try:
        data = json.loads(cursor)
        if data.get("kind") != "tdl":
            raise ValueError("not a TDL cursor")
        position = [int(index) for index in data["position"]]
        bindings = {name: _decode_binding(value) for name, value in data["bindings"].items()}
        return position, bindings, int(data.get("draws", 0))
    except (ValueError, KeyError, TypeError, AttributeError) as e:
        raise RuntimeFault(None, "unreadable cursor: %s" % e)


#############
# Interpreter
#############
class Interpreter(Evaluator):
    def __init__(self, env, snapshot, rng=None, bindings=None):
        super(Interpreter, self).__init__(env, snapshot, rng, bindings)
        self.emitted = []

    def run_block(self, block, trail, resume=None):
        start = 0
        if resume:
            start = resume[0]
            if start > len(block):
                raise IndexError(start)
            if len(resume) > 1:
                self.resume_into(block[start], trail + [start], resume[1:])
                start += 1
        for index in range(start, len(block)):
            self.execute(block[index], trail + [index])

    def resume_into(self, stmt, trail, rest):
        blocks = n.child_blocks(stmt)
        branch = rest[0]
        self.run_block(blocks[branch], trail + [branch], rest[1:])

    @staticmethod
    def after(trail):
        return trail[:-1] + [trail[-1] + 1]

    def execute(self, stmt, trail):
        if isinstance(stmt, n.Let):
            self.bindings[stmt.name] = self.materialize(self.ref(stmt.value), stmt.span)
        elif isinstance(stmt, n.Wait):
            ticks = self.value(stmt.ticks)
            if type(ticks) is not int:
                raise RuntimeFault(stmt.span, "wait needs an Int, got %s" % type_name(ticks))
            raise _Suspend("wait", self.env.tick + max(1, ticks), self.after(trail))
        elif isinstance(stmt, n.Await):
            target = self.prop_handle(self.ref(stmt.target), stmt.span)
            raise _Suspend("await", target.path(), self.after(trail))
        elif isinstance(stmt, n.Emit):
            self.emitted.extend(self.update(update) for update in stmt.updates)
        elif isinstance(stmt, n.Return):
            updates = tuple(self.update(update) for update in stmt.updates)
            raise _Finish(ResultStructure(updates, not stmt.stop))
        elif isinstance(stmt, n.If):
            if self.truth(stmt.cond):
                self.run_block(stmt.body, trail + [0])
            elif stmt.orelse is not None:
                self.run_block(stmt.orelse, trail + [1])
        elif isinstance(stmt, n.Switch):
            subject = self.value(stmt.subject)
            for number, case in enumerate(stmt.cases):
                if values_equal(subject, case.value.value):
                    self.run_block(case.body, trail + [number])
                    return
            if stmt.default is not None:
                self.run_block(stmt.default, trail + [len(stmt.cases)])
        elif isinstance(stmt, n.Select):
            self.select(stmt, trail)
        else:
            raise RuntimeFault(getattr(stmt, "span", None), "cannot execute %r" % (stmt,))

    def candidates(self, stmt):
        source = self.container(self.ref(stmt.source), stmt.span)
        if isinstance(source, WorldHandle):
            world = self.lookup(source, stmt.span)
            return [EntityHandle(source.world, name) for name in sorted(world.entities)]
        if isinstance(source, tuple):
            return list(source)
        raise RuntimeFault(stmt.span, "cannot select from %s" % _describe(source))

    def select(self, stmt, trail):
        best = best_key = None
        for candidate in self.candidates(stmt):
            self.bindings[stmt.binder] = candidate
            try:
                if stmt.where is not None and not self.truth(stmt.where):
                    continue
                if stmt.minimizing is None:
                    best = candidate
                    break
                key = self.value(stmt.minimizing)
            except MissingPath:
                # Entities without the properties asked for simply don't match.
                continue
            if not _is_number(key):
                raise RuntimeFault(stmt.minimizing.span, "minimizing needs a number")
            # Strictly smaller, so ties go to the first candidate in name order.
            if best is None or key < best_key:
                best, best_key = candidate, key
        self.bindings.pop(stmt.binder, None)
        if best is None:
            if stmt.orelse is None:
                raise _Finish(ResultStructure((), True))
            self.run_block(stmt.orelse, trail + [1])
            return
        self.bindings[stmt.binder] = best
        self.run_block(stmt.body, trail + [0])

    def run(self, program, resume=None):
        try:
            try:
                self.run_block(program.body, [], resume)
            except (IndexError, TypeError) as e:
                if resume:
                    raise RuntimeFault(None, "cursor does not fit this program: %s" % e)
                raise
        except _Finish as finish:
            return Finished(finish.result, tuple(self.emitted))
        except _Suspend as suspend:
            cursor = encode_cursor(
                suspend.position, self.bindings, self.rng.position if self.rng else 0
            )
            if suspend.kind == "wait":
                return SuspendUntil(suspend.detail, cursor, tuple(self.emitted))
            return AwaitProcess(suspend.detail, cursor, tuple(self.emitted))
        return Finished(ResultStructure((), True), tuple(self.emitted))


def interpret_segment(program, cursor, env, snapshot, rng=None):
    """
    Run one segment of `program` for the process described by `env`.

    `cursor` is None for a fresh iteration or a cursor string returned in an
    earlier SuspendUntil/AwaitProcess. Returns SuspendUntil, AwaitProcess or
    Finished. Raises RuntimeFault for type errors, division by zero and
    missing paths read as values.
    """
    bindings = {}
    position = None
    if cursor:
        position, bindings, draws = decode_cursor(cursor)
        if rng is not None:
            rng.position = draws
    interpreter = Interpreter(env, snapshot, rng, bindings)
    return interpreter.run(program, position)
