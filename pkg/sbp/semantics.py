"""
The semantics host: runs one segment of a process, whatever its transition
is written in.

A transition description names a semantics binding by id. The scenario
declares its bindings:

* "tdl": the transition source is a TDL program (the built-in binding
  named "tdl" always exists);
* "native": the source is ignored and a Python behaviour registered with
  `library.native(name)` runs instead;
* "external": a driver program answers over a channel (see sbp.external).

Python behaviours and scripted drivers register themselves on `library`
the same way template filters register on a Django template library:

    from sbp.semantics import library

    @library.native("village.enter")
    def enter_village(ctx):
        ...
"""
import json
import logging
import threading
from dataclasses import dataclass, field
from typing import Optional, Tuple

from django.core.exceptions import ImproperlyConfigured

from .exceptions import (
    ExternalTimeout,
    NotFound,
    ProtocolError,
    RuntimeFault,
    SchemaError,
    SemanticsFailure,
    TargetMissing,
    UnknownSemantics,
)
from .external import open_channel, parse_channel_spec
from .model import (
    AwaitProcess,
    Entity,
    Finished,
    Path,
    ResultStructure,
    SuspendUntil,
    TransitionDescription,
    World,
    resolve_path,
)
from .rng import RandomStream
from .tdl.interpreter import Environment, interpret_segment
from .tdl.parser import parse
from .updates import RebindProcess, SetTransition, parse_update
from .utils import has_required_args, setting, split_path
from .values import encode_value, is_value

logger = logging.getLogger(__name__)

TDL = "tdl"
NATIVE = "native"
EXTERNAL = "external"
KINDS = (TDL, NATIVE, EXTERNAL)

CANCEL = "Cancel"
EMPTY_RESULT = "EmptyResult"
ON_TIMEOUT = (CANCEL, EMPTY_RESULT)


class Library(object):
    """Registry of native behaviours and scripted external drivers."""

    def __init__(self):
        self.natives = {}
        self.scripts = {}

    def _register(self, registry, name, what):
        def decorator(func):
            if has_required_args(func) != 1:
                raise ImproperlyConfigured(
                    "%s %r must take exactly one argument" % (what, name)
                )
            registry[name] = func
            return func

        return decorator

    def native(self, name):
        """Register `func(ctx)` as the native behaviour `name`."""
        return self._register(self.natives, name, "Native behaviour")

    def script(self, name):
        """Register `func(request) -> response` as the scripted driver `name`."""
        return self._register(self.scripts, name, "Script driver")


library = Library()


@dataclass(frozen=True)
class SemanticsBinding:
    id: str
    kind: str = TDL
    behaviour: Optional[str] = None
    channel: Optional[str] = None
    timeout_ticks: Optional[int] = None
    on_timeout: str = CANCEL
    read_view: Tuple[str, ...] = ()

    @classmethod
    def from_document(cls, semantics_id, document, library=library):
        where = "semantics.%s" % semantics_id
        if not isinstance(document, dict):
            raise SchemaError(where, "expected an object")
        kind = document.get("kind")
        if kind not in KINDS:
            raise SchemaError(where, "kind must be one of %s" % ", ".join(KINDS))
        if kind == TDL:
            return cls(semantics_id, TDL)
        if kind == NATIVE:
            behaviour = document.get("behaviour")
            if behaviour not in library.natives:
                raise SchemaError(where, "no native behaviour named %r" % (behaviour,))
            return cls(semantics_id, NATIVE, behaviour=behaviour)
        channel = document.get("channel", "stdio")
        try:
            parse_channel_spec(channel)
        except (ValueError, AttributeError) as e:
            raise SchemaError(where, str(e))
        timeout_ticks = document.get("timeoutTicks")
        if timeout_ticks is not None and (type(timeout_ticks) is not int or timeout_ticks < 1):
            raise SchemaError(where, "timeoutTicks must be a positive integer")
        on_timeout = document.get("onTimeout", CANCEL)
        if on_timeout not in ON_TIMEOUT:
            raise SchemaError(where, "onTimeout must be one of %s" % ", ".join(ON_TIMEOUT))
        read_view = document.get("readView", [])
        if not isinstance(read_view, list):
            raise SchemaError(where, "readView must be a list of paths")
        for spec in read_view:
            try:
                split_path(spec)
            except Exception as e:
                raise SchemaError(where, "bad readView path %r: %s" % (spec, e))
        return cls(
            semantics_id,
            EXTERNAL,
            channel=channel,
            timeout_ticks=timeout_ticks,
            on_timeout=on_timeout,
            read_view=tuple(read_view),
        )

    def to_document(self):
        document = {"kind": self.kind}
        if self.kind == NATIVE:
            document["behaviour"] = self.behaviour
        elif self.kind == EXTERNAL:
            document["channel"] = self.channel
            document["onTimeout"] = self.on_timeout
            document["readView"] = list(self.read_view)
            if self.timeout_ticks is not None:
                document["timeoutTicks"] = self.timeout_ticks
        return document


DEFAULT_BINDINGS = (SemanticsBinding(TDL, TDL),)


@dataclass
class InvocationContext:
    """What a segment may know: who runs, when, and the tick's snapshot."""

    world: str
    entity: str
    process: str
    tick: int
    snapshot: object
    rng: RandomStream
    cursor: Optional[str] = None
    iteration: int = 0
    begin_tick: int = 0
    source: str = ""

    @property
    def path(self):
        return Path(self.world, self.entity, self.process)

    @property
    def me(self):
        return self.snapshot.get_entity(self.world, self.entity)


def _external_cursor(pending):
    return json.dumps({"kind": "external", "pending": pending}, sort_keys=True, separators=(",", ":"))


def _pending_count(cursor):
    if not cursor:
        return 0
    try:
        data = json.loads(cursor)
    except ValueError:
        return 0
    if not isinstance(data, dict) or data.get("kind") != "external":
        return 0
    return int(data.get("pending", 0))


class SemanticsHost(object):
    """
    Dispatches `invoke(transition, ctx)` to the binding the transition names.
    One host serves one run; it caches parsed programs and open channels.
    """

    def __init__(self, bindings=DEFAULT_BINDINGS, library=library, channel_override=None, debug_checks=None):
        self.bindings = {binding.id: binding for binding in DEFAULT_BINDINGS}
        for binding in bindings:
            self.bindings[binding.id] = binding
        self.library = library
        self.channel_override = channel_override
        if debug_checks is None:
            debug_checks = setting("DEBUG_CHECKS", False)
        self.debug_checks = debug_checks
        self._programs = {}
        self._channels = {}
        self._lock = threading.Lock()
        self.watchdog = None

    def get(self, semantics_id):
        try:
            return self.bindings[semantics_id]
        except KeyError:
            raise UnknownSemantics(semantics_id)

    def __contains__(self, semantics_id):
        return semantics_id in self.bindings

    def program(self, source):
        with self._lock:
            if source not in self._programs:
                program, diagnostics = parse(source)
                errors = [d for d in diagnostics if d.is_error]
                self._programs[source] = (program, errors)
        program, errors = self._programs[source]
        if errors:
            raise RuntimeFault(errors[0].span, "transition does not parse: %s" % errors[0].message)
        return program

    def channel(self, spec):
        spec = self.channel_override or spec
        with self._lock:
            if spec not in self._channels:
                self._channels[spec] = open_channel(spec, self.library.scripts)
                self._channels[spec].watchdog = self.watchdog
            return self._channels[spec]

    def set_watchdog(self, started, seconds):
        """Give driver reads a deadline of `seconds` after `started`; None clears it."""
        with self._lock:
            self.watchdog = None if seconds is None else (started, seconds)
            for channel in self._channels.values():
                channel.watchdog = self.watchdog

    def close(self):
        with self._lock:
            for channel in self._channels.values():
                channel.close()
            self._channels.clear()

    def invoke(self, transition, ctx):
        """
        Run one segment of `transition` for the process `ctx` describes and
        return SuspendUntil, AwaitProcess or Finished.
        """
        binding = self.get(transition.semantics)
        ctx.source = transition.source
        if binding.kind == TDL:
            return self.invoke_tdl(transition, ctx)
        if binding.kind == NATIVE:
            return self.invoke_native(binding, ctx)
        return self.invoke_external(binding, ctx)

    def invoke_tdl(self, transition, ctx):
        program = self.program(transition.source)
        env = Environment(ctx.world, ctx.entity, ctx.process, ctx.tick)
        start = ctx.rng.position
        outcome = interpret_segment(program, ctx.cursor, env, ctx.snapshot, ctx.rng)
        if self.debug_checks:
            again = interpret_segment(
                program, ctx.cursor, env, ctx.snapshot, RandomStream(ctx.rng.key, start)
            )
            if again != outcome:
                raise SemanticsFailure(ctx.path, "segment is not deterministic")
        return outcome

    def invoke_native(self, binding, ctx):
        behaviour = self.library.natives.get(binding.behaviour)
        if behaviour is None:
            raise UnknownSemantics(binding.id)
        outcome = behaviour(ctx)
        if isinstance(outcome, ResultStructure):
            outcome = Finished(outcome)
        if not isinstance(outcome, (SuspendUntil, AwaitProcess, Finished)):
            raise SemanticsFailure(
                ctx.path, "native behaviour %r returned %r" % (binding.behaviour, outcome)
            )
        return outcome

    def view(self, binding, ctx):
        """The path -> encoded value map an external driver gets to read."""
        view = {}

        def add_entity(world, entity):
            for key, value in entity.data.items():
                view[str(Path(world, entity.name, key))] = encode_value(value)

        me = ctx.me
        if me is not None:
            add_entity(ctx.world, me)
        for spec in binding.read_view:
            parts = split_path(spec)
            if parts[0] == "me":
                parts = [ctx.world, ctx.entity] + parts[1:]
            elif parts[0] == "myworld":
                parts = [ctx.world] + parts[1:]
            if len(parts) > 3:
                continue
            path = Path(*parts)
            try:
                item = resolve_path(ctx.snapshot, path)
            except NotFound:
                continue
            if isinstance(item, World):
                for entity in item.entities.values():
                    add_entity(item.name, entity)
            elif isinstance(item, Entity):
                add_entity(path.world, item)
            elif is_value(item):
                view[str(path)] = encode_value(item)
        return view

    def invoke_external(self, binding, ctx):
        channel = self.channel(binding.channel)
        response = channel.exchange(
            {
                "tick": ctx.tick,
                "world": ctx.world,
                "entity": ctx.entity,
                "process": ctx.process,
                "iteration": ctx.iteration,
                "view": self.view(binding, ctx),
            }
        )
        if response.get("pending"):
            pending = _pending_count(ctx.cursor) + 1
            timeout = binding.timeout_ticks or setting("EXTERNAL_TIMEOUT_TICKS", 10)
            if pending >= timeout:
                if binding.on_timeout == EMPTY_RESULT:
                    logger.info("%s: driver timed out; finishing with no updates", ctx.path)
                    return Finished(ResultStructure((), True))
                raise ExternalTimeout(
                    "%s: no answer from %s after %d ticks" % (ctx.path, binding.channel, pending)
                )
            return SuspendUntil(ctx.tick + 1, _external_cursor(pending))
        try:
            updates = tuple(parse_update(text) for text in response.get("updates", []))
        except ValueError as e:
            raise ProtocolError("%s: bad update from driver: %s" % (ctx.path, e))
        wait = response.get("wait", 0)
        if wait > 0:
            return SuspendUntil(ctx.tick + wait, _external_cursor(0), updates)
        return Finished(ResultStructure(updates, response.get("cont", True)))


def swap_control(config, world, entity, process, new_semantics_id, host=None):
    """
    Return the updates that hand control of a running process to another
    semantics binding: a copy of its transition bound to `new_semantics_id`
    and a rebind of the process onto that copy.
    """
    if host is not None:
        host.get(new_semantics_id)
    owner = config.get_entity(world, entity)
    running = owner.processes.get(process) if owner is not None else None
    if running is None:
        raise TargetMissing("No process %s to hand over" % Path(world, entity, process))
    transition = owner.transitions.get(running.transition)
    if transition is None:
        raise TargetMissing(
            "Process %s runs the missing transition %r" % (Path(world, entity, process), running.transition)
        )
    base = transition.name.split("@", 1)[0]
    original = owner.transitions.get(base)
    if transition.semantics == new_semantics_id:
        copy = transition
    elif original is not None and original.semantics == new_semantics_id:
        # handing control back
        copy = original
    else:
        copy = TransitionDescription("%s@%s" % (base, new_semantics_id), new_semantics_id, transition.source)
    return [
        SetTransition(world, entity, copy.name, copy),
        RebindProcess(world, entity, process, copy.name),
    ]


__all__ = [
    "InvocationContext",
    "Library",
    "SemanticsBinding",
    "SemanticsHost",
    "library",
    "swap_control",
]
