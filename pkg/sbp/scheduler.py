"""
The engine loop.

Each tick:

1. every due process runs one segment against the tick-open snapshot
   (in (world, entity, process) order, possibly on several threads);
2. the updates the segments emitted are expanded and bucketed by target;
3. `apply_all` folds the buckets into the next configuration;
4. process lifecycle: finished processes are removed and respawned when
   they asked to continue, suspended and awaiting processes get their new
   state, failed processes are cancelled.

A process is due when it is Ready (and its begin tick has come), Suspended
until this tick, or Awaiting a process that is gone or has moved on to a
new iteration since it was first seen.
"""
import hashlib
import logging
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import List, Optional

from . import trace
from .exceptions import (
    ExpansionFailure,
    ExternalTimeout,
    InvalidConfiguration,
    ProtocolError,
    RuntimeFault,
    SemanticsFailure,
    UnknownMacro,
    UnknownSemantics,
    WallclockExceeded,
)
from .macros import MacroRegistry, expand_update
from .model import (
    READY,
    Awaiting,
    AwaitProcess,
    Finished,
    FinishedPending,
    Path,
    Process,
    Ready,
    Suspended,
    SuspendUntil,
    check_invariants,
    errors_only,
    validate_configuration,
)
from .rng import rng_stream
from .semantics import InvocationContext, SemanticsHost
from .updates import (
    EXPANSION_FAILURE,
    BucketEntry,
    CancelProcess,
    CommitReport,
    ConflictPolicy,
    DroppedUpdate,
    apply_all,
    collect_buckets,
)
from .utils import setting

logger = logging.getLogger(__name__)

GENESIS_HASH = "0" * 64


def chain_hash(previous, tick, committed):
    """Extend the replay hash with the canonical texts committed at `tick`."""
    material = "%s|%d|%s" % (previous, tick, "\n".join(committed))
    return hashlib.sha256(material.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class Failure:
    """A segment that could not run; its process gets cancelled."""

    reason: str
    detail: str = ""


@dataclass
class EngineState:
    config: object
    root_seed: int = 0
    policy: ConflictPolicy = ConflictPolicy.LAST_WRITER_WINS
    macros: MacroRegistry = field(default_factory=MacroRegistry)
    host: SemanticsHost = field(default_factory=SemanticsHost)
    sinks: List = field(default_factory=list)
    max_ticks: Optional[int] = None
    replay_hash: str = GENESIS_HASH
    workers: int = 1
    debug_checks: bool = False
    # buckets committed by the last tick, for inspection
    pending: List = field(default_factory=list)
    counts: Counter = field(default_factory=Counter)
    _executor: Optional[ThreadPoolExecutor] = None

    def map(self, func, items):
        if self.workers <= 1 or len(items) <= 1:
            return [func(item) for item in items]
        if self._executor is None:
            self._executor = ThreadPoolExecutor(max_workers=self.workers, thread_name_prefix="sbp")
        return list(self._executor.map(func, items))

    def shutdown(self):
        if self._executor is not None:
            self._executor.shutdown()
            self._executor = None


@dataclass
class TraceSummary:
    ticks: int
    final_tick: int
    replay_hash: str
    events: Counter

    @property
    def committed(self):
        return self.events[trace.UPDATE_COMMITTED]

    @property
    def dropped(self):
        return self.events[trace.UPDATE_DROPPED]

    def __str__(self):
        return "ticks: %d\nfinal tick: %d\nevents: %d\ncommitted: %d\ndropped: %d\nreplay hash: %s" % (
            self.ticks,
            self.final_tick,
            sum(self.events.values()),
            self.committed,
            self.dropped,
            self.replay_hash,
        )


class _Events(object):
    def __init__(self, tick):
        self.tick = tick
        self.events = []

    def add(self, kind, subject="", payload=None):
        self.events.append(trace.TraceEvent(self.tick, len(self.events), kind, str(subject), payload))


def _process_at(config, world, entity, name):
    owner = config.get_entity(world, entity)
    if owner is None:
        return None
    return owner.processes.get(name)


def _set_process(config, world, entity, name, process):
    """Replace (or with None, remove) one process in `config`, copying its containers."""
    owner_world = config.worlds[world].copy()
    owner = owner_world.entities[entity].copy()
    if process is None:
        del owner.processes[name]
    else:
        owner.processes[name] = process
    owner_world.entities[entity] = owner
    config.worlds[world] = owner_world


def due_processes(snapshot):
    """
    Return (due, sightings): the (world, entity, process) triples that run a
    segment this tick, and the awaiting processes that see their target for
    the first time together with the target's identity.
    """
    tick = snapshot.tick
    due = []
    sightings = []
    for world, entity, process in snapshot.iter_processes():
        state = process.state
        item = (world.name, entity.name, process)
        if isinstance(state, Ready):
            if process.begin_tick <= tick:
                due.append(item)
        elif isinstance(state, Suspended):
            if state.resume_tick <= tick:
                due.append(item)
        elif isinstance(state, Awaiting):
            target = _process_at(snapshot, state.target.world, state.target.entity, state.target.property)
            if target is None:
                due.append(item)
            elif state.seen is None:
                sightings.append((item, target.identity()))
            elif target.identity() != state.seen:
                due.append(item)
        elif isinstance(state, FinishedPending):
            due.append(item)
    return due, sightings


def _run_segment(state, snapshot, item):
    world, entity, process = item
    if isinstance(process.state, FinishedPending):
        return Finished(process.state.result)
    path = Path(world, entity, process.name)
    transition = snapshot.get_entity(world, entity).transitions.get(process.transition)
    if transition is None:
        return Failure("TransitionMissing", "no transition %r" % process.transition)
    ctx = InvocationContext(
        world,
        entity,
        process.name,
        snapshot.tick,
        snapshot,
        rng_stream(state.root_seed, world, entity, process.name, process.iteration),
        process.cursor,
        process.iteration,
        process.begin_tick,
    )
    try:
        return state.host.invoke(transition, ctx)
    except WallclockExceeded:
        raise
    except ExternalTimeout as e:
        return Failure("ExternalTimeout", e.msg)
    except (UnknownSemantics, RuntimeFault, SemanticsFailure, ProtocolError) as e:
        return Failure(type(e).__name__, e.msg)
    except Exception as e:
        logger.exception("Segment of %s blew up", path)
        return Failure("SemanticsFailure", "%s: %s" % (type(e).__name__, e))


def _outcome_name(outcome):
    return {
        SuspendUntil: "suspend",
        AwaitProcess: "await",
        Finished: "finish",
        Failure: "failure",
    }[type(outcome)]


def run_tick(state):
    """Run one tick; `state.config` becomes the configuration of the next tick."""
    snapshot = state.config
    tick = snapshot.tick
    events = _Events(tick)
    due, sightings = due_processes(snapshot)
    events.add(trace.TICK_OPEN, payload={"due": len(due)})

    outcomes = state.map(lambda item: _run_segment(state, snapshot, item), due)

    entries = []
    for (world, entity, process), outcome in zip(due, outcomes):
        path = Path(world, entity, process.name)
        events.add(trace.SEGMENT_RUN, path, {"outcome": _outcome_name(outcome)})
        if isinstance(outcome, Failure):
            events.add(trace.SEMANTICS_FAILURE, path, {"reason": outcome.reason, "detail": outcome.detail})
            continue
        updates = list(outcome.emitted)
        if isinstance(outcome, Finished):
            updates.extend(outcome.result.updates)
        for seq, update in enumerate(updates):
            try:
                expanded = expand_update(update, snapshot, state.macros, emitter=path)
            except (UnknownMacro, ExpansionFailure, TypeError) as e:
                logger.warning("Dropping an update of %s at tick %d: %s", path, tick, e)
                rendered = update.render() if hasattr(update, "render") else repr(update)
                events.add(
                    trace.UPDATE_DROPPED,
                    path,
                    {"update": rendered, "reason": EXPANSION_FAILURE, "detail": str(e)},
                )
                continue
            for sub, core in enumerate(expanded):
                entries.append(BucketEntry(path, seq, core, sub))

    buckets = collect_buckets(entries)
    report = CommitReport()
    config = apply_all(snapshot, buckets, snapshot, state.policy, report)
    next_tick = config.tick

    for entry in report.committed:
        events.add(trace.UPDATE_COMMITTED, entry.emitter, {"update": entry.render()})
    for drop in report.dropped:
        events.add(
            trace.UPDATE_DROPPED,
            drop.entry.emitter,
            {"update": drop.entry.render(), "reason": drop.reason, "detail": drop.detail},
        )

    # Lifecycle. Only entries the updates left alone are touched: a process
    # that was rebound or cancelled this tick keeps what the updates made of it.
    accounted = set()
    for (world, entity, process), outcome in zip(due, outcomes):
        path = Path(world, entity, process.name)
        current = _process_at(config, world, entity, process.name)
        unchanged = current == process
        if isinstance(outcome, Finished):
            accounted.add(path)
            events.add(trace.PROCESS_FINISHED, path, {"cont": outcome.result.cont})
            if not unchanged:
                continue
            respawn = None
            owner = config.get_entity(world, entity)
            if outcome.result.cont and process.transition in owner.transitions:
                respawn = Process(process.name, process.transition, next_tick, process.iteration + 1, READY)
            _set_process(config, world, entity, process.name, respawn)
            if respawn is not None:
                events.add(trace.PROCESS_RESPAWNED, path, {"iteration": respawn.iteration})
        elif not unchanged:
            continue
        elif isinstance(outcome, SuspendUntil):
            resume = max(outcome.tick, next_tick)
            _set_process(config, world, entity, process.name, replace(process, state=Suspended(resume, outcome.cursor)))
            events.add(trace.PROCESS_SUSPENDED, path, {"until": resume})
        elif isinstance(outcome, AwaitProcess):
            target = outcome.target
            awaited = _process_at(snapshot, target.world, target.entity, target.property)
            seen = awaited.identity() if awaited is not None else None
            _set_process(
                config,
                world,
                entity,
                process.name,
                replace(process, state=Awaiting(target, outcome.cursor, seen)),
            )
            events.add(trace.PROCESS_AWAITING, path, {"target": str(outcome.target)})
        else:
            accounted.add(path)
            logger.warning("Cancelling %s at tick %d: %s %s", path, tick, outcome.reason, outcome.detail)
            _set_process(config, world, entity, process.name, None)
            events.add(trace.PROCESS_CANCELLED, path, {"reason": outcome.reason})

    for (world, entity, process), identity in sightings:
        if _process_at(config, world, entity, process.name) == process:
            seen = replace(process.state, seen=identity)
            _set_process(config, world, entity, process.name, replace(process, state=seen))

    cancelled = {
        Path(entry.update.world, entry.update.entity, entry.update.process)
        for entry in report.committed
        if isinstance(entry.update, CancelProcess)
    }
    before = {Path(w.name, e.name, p.name) for w, e, p in snapshot.iter_processes()}
    after = {Path(w.name, e.name, p.name) for w, e, p in config.iter_processes()}
    for path in sorted(before - after - accounted, key=Path.sort_key):
        reason = "CancelProcess" if path in cancelled else "Removed"
        events.add(trace.PROCESS_CANCELLED, path, {"reason": reason})
    for path in sorted(after - before, key=Path.sort_key):
        events.add(trace.PROCESS_STARTED, path)

    state.replay_hash = chain_hash(state.replay_hash, tick, [entry.render() for entry in report.committed])
    events.add(trace.TICK_CLOSE, payload={"replayHash": state.replay_hash, "processes": len(after)})

    if state.debug_checks:
        check_invariants(config)
    for sink in state.sinks:
        sink.write(events.events)
    state.counts.update(event.kind for event in events.events)
    state.pending = buckets
    state.config = config
    logger.debug("Tick %d closed: %d segment(s), %d update(s)", tick, len(due), len(report.committed))
    return state


def run(
    config0,
    root_seed=0,
    max_ticks=None,
    policy=None,
    sinks=(),
    macros=None,
    host=None,
    replay_hash=GENESIS_HASH,
    wallclock_limit=None,
    on_tick=None,
    workers=None,
    debug_checks=None,
):
    """
    Run from `config0` for at most `max_ticks` ticks (None: until no process
    is left) and return (final configuration, TraceSummary).

    `on_tick(state)` is called after every tick. Raises InvalidConfiguration
    for an invalid start, TickAborted under FailTick and WallclockExceeded
    when `wallclock_limit` seconds have passed.
    """
    errors = errors_only(validate_configuration(config0))
    if errors:
        raise InvalidConfiguration(errors)
    if policy is None:
        policy = setting("DEFAULT_POLICY", ConflictPolicy.LAST_WRITER_WINS)
    state = EngineState(
        config=config0,
        root_seed=root_seed,
        policy=ConflictPolicy.parse(policy),
        macros=macros if macros is not None else MacroRegistry(),
        host=host if host is not None else SemanticsHost(),
        sinks=list(sinks),
        max_ticks=max_ticks,
        replay_hash=replay_hash,
        workers=workers if workers is not None else setting("WORKERS", 1),
        debug_checks=debug_checks if debug_checks is not None else setting("DEBUG_CHECKS", False),
    )
    start_tick = config0.tick
    started = time.monotonic()
    state.host.set_watchdog(started, wallclock_limit)
    logger.info("Starting run at tick %d (seed %d, policy %s)", start_tick, root_seed, state.policy.value)
    try:
        while max_ticks is None or state.config.tick - start_tick < max_ticks:
            run_tick(state)
            if on_tick is not None:
                on_tick(state)
            if state.config.count_processes() == 0:
                break
            if wallclock_limit is not None and time.monotonic() - started > wallclock_limit:
                raise WallclockExceeded(state.config.tick, time.monotonic() - started)
    finally:
        state.shutdown()
    summary = TraceSummary(state.config.tick - start_tick, state.config.tick, state.replay_hash, state.counts)
    logger.info("Run finished at tick %d; replay hash %s", state.config.tick, state.replay_hash)
    return state.config, summary
