import copy
import random

from django.test import SimpleTestCase

from sbp.exceptions import TickAborted
from sbp.model import READY, Path, Process, TransitionDescription
from sbp.scenario import dump_document, to_document
from sbp.updates import (
    CONFLICT,
    GUARD_FAILED,
    TARGET_MISSING,
    AddWorld,
    BucketEntry,
    CancelProcess,
    Compare,
    CommitReport,
    ConflictPolicy,
    CopyProperties,
    CreateEntity,
    DeleteData,
    DeleteEntity,
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
    UpdateBucket,
    apply_all,
    apply_bucket,
    collect_buckets,
    parse_update,
)
from sbp.values import Coord, EntityRef, WorldRef

from .base import make_config

LWW = ConflictPolicy.LAST_WRITER_WINS


def entries(*updates, emitter="w.driver.p"):
    """Bucket entries in emission order from one emitter."""
    return [BucketEntry(Path.parse(emitter), seq, update) for seq, update in enumerate(updates)]


def bucket_of(*entry_lists):
    flat = [entry for entry_list in entry_lists for entry in entry_list]
    return UpdateBucket(flat[0].update.target(), flat)


class UpdateTextTest(SimpleTestCase):
    def test_render(self):
        cases = [
            (SetData("w", "ch", "loc", Coord(1, -1)), "set_data w.ch.loc = (1,-1)"),
            (DeleteData("w", "corn1", "loc"), "delete_data w.corn1.loc"),
            (StartProcess("w", "corn1", "eaten", "beenEaten"), "start_process w.corn1.eaten <- beenEaten"),
            (RebindProcess("w", "ch", "move", "mvSmart"), "rebind_process w.ch.move <- mvSmart"),
            (AddWorld("hyp", "w_barker"), "add_world hyp from w_barker"),
            (DeleteWorld("hyp"), "delete_world hyp"),
            (
                CopyProperties("w", "corn", "w", "ch", ("mvSmart",)),
                "copy_properties w.corn -> w.ch [mvSmart]",
            ),
            (CopyProperties("a", "x", "b", "x"), "copy_properties a.x -> b.x *"),
            (
                Guarded(Exists(Path("j", "banana", "loc")), DeleteData("j", "banana", "loc")),
                "when exists j.banana.loc do delete_data j.banana.loc",
            ),
            (Macro("eatCorn", (EntityRef("corn1"),)), "eatCorn(ref(corn1))"),
            (Macro("mv_up"), "mv_up"),
            (SetData("w", "a-b", "offers", ("x",)), 'set_data w."a-b".offers = ["x"]'),
        ]
        for update, text in cases:
            self.assertEqual(text, update.render())
            self.assertEqual(update, parse_update(text))

    def test_parse_values(self):
        update = parse_update('set_data w.e.k = [unit, true, -2, -0.5, "s", ref(x), wref(y), (0,-3)]')
        self.assertEqual((None, True, -2, -0.5, "s", EntityRef("x"), WorldRef("y"), Coord(0, -3)), update.value)

    def test_parse_transition(self):
        update = parse_update('set_transition w.e.t = tdl "wait(1)\\n"')
        self.assertEqual(SetTransition("w", "e", "t", TransitionDescription("t", "tdl", "wait(1)\n")), update)

    def test_parse_guards(self):
        self.assertEqual(NotExists(Path("w", "e")), parse_update("when missing w.e do create_entity w.e").guard)
        self.assertEqual(
            Compare(Path("w", "e", "n"), "<", 3), parse_update("when w.e.n < 3 do delete_data w.e.n").guard
        )

    def test_parse_errors(self):
        for text in ("set_data w.e = 1", "delete_world", "start_process w.e.p <-", "set_data w.e.k = (1.5,2)"):
            with self.assertRaises(ValueError):
                parse_update(text)

    def test_policy_names(self):
        self.assertIs(ConflictPolicy.FAIL_TICK, ConflictPolicy.parse("FailTick"))
        self.assertIs(ConflictPolicy.FIRST_WINS, ConflictPolicy.parse("FIRST_WINS"))
        with self.assertRaises(ValueError):
            ConflictPolicy.parse("Whatever")


class ApplyBucketTest(SimpleTestCase):
    def setUp(self):
        self.config = make_config(
            {
                "w": {
                    "ch": {
                        "data": {"n": 1},
                        "transitions": {"mv": "wait(1)\n", "mvSmart": "wait(2)\n"},
                        "processes": {"move": "mv"},
                    },
                    "driver": {},
                }
            },
            tick=4,
        )

    def apply(self, *updates, policy=LWW):
        return apply_bucket(self.config, bucket_of(entries(*updates)), self.config, policy)

    def test_set_and_delete_data(self):
        config, dropped = self.apply(SetData("w", "ch", "m", 2), DeleteData("w", "ch", "n"))
        self.assertEqual({"m": 2}, config.get_entity("w", "ch").data)
        self.assertEqual([], dropped)
        self.assertEqual({"n": 1}, self.config.get_entity("w", "ch").data)

    def test_set_data_on_a_process_name(self):
        config, dropped = self.apply(SetData("w", "ch", "move", 2))
        self.assertEqual([CONFLICT], [drop.reason for drop in dropped])
        self.assertNotIn("move", config.get_entity("w", "ch").data)

    def test_start_process(self):
        config, dropped = self.apply(StartProcess("w", "ch", "think", "mvSmart"))
        self.assertEqual([], dropped)
        self.assertEqual(Process("think", "mvSmart", 5, 0, READY), config.get_entity("w", "ch").processes["think"])

    def test_start_process_needs_the_transition(self):
        _, dropped = self.apply(StartProcess("w", "ch", "think", "nothing"))
        self.assertEqual([TARGET_MISSING], [drop.reason for drop in dropped])

    def test_start_running_process(self):
        _, dropped = self.apply(StartProcess("w", "ch", "move", "mvSmart"))
        self.assertEqual([CONFLICT], [drop.reason for drop in dropped])

    def test_rebind_keeps_iteration(self):
        owner = self.config.worlds["w"].entities["ch"]
        owner.processes["move"] = Process("move", "mv", 1, 6, READY)
        config, _ = self.apply(RebindProcess("w", "ch", "move", "mvSmart"))
        self.assertEqual(Process("move", "mvSmart", 5, 6, READY), config.get_entity("w", "ch").processes["move"])

    def test_rebind_to_the_same_transition_is_a_no_op(self):
        config, dropped = self.apply(RebindProcess("w", "ch", "move", "mv"))
        self.assertEqual([], dropped)
        self.assertEqual(self.config.get_entity("w", "ch").processes, config.get_entity("w", "ch").processes)

    def test_cancel_missing_process(self):
        _, dropped = self.apply(CancelProcess("w", "ch", "sleep"))
        self.assertEqual([TARGET_MISSING], [drop.reason for drop in dropped])

    def test_missing_entity(self):
        _, dropped = self.apply(SetData("w", "hen", "n", 1))
        self.assertEqual([TARGET_MISSING], [drop.reason for drop in dropped])

    def test_guards_read_the_snapshot(self):
        config, dropped = self.apply(
            Guarded(Equals(Path("w", "ch", "n"), 1), SetData("w", "ch", "n", 2)),
            Guarded(Exists(Path("w", "ch", "age")), SetData("w", "ch", "old", True)),
        )
        self.assertEqual(2, config.get_entity("w", "ch").data["n"])
        self.assertEqual([GUARD_FAILED], [drop.reason for drop in dropped])

    def test_last_writer_wins(self):
        bucket = bucket_of(
            entries(SetData("w", "ch", "n", 10), emitter="w.a.p"),
            entries(SetData("w", "ch", "n", 20), emitter="w.b.p"),
        )
        config, dropped = apply_bucket(self.config, bucket, self.config, LWW)
        self.assertEqual(20, config.get_entity("w", "ch").data["n"])
        self.assertEqual([("w.a.p", CONFLICT)], [(str(d.entry.emitter), d.reason) for d in dropped])

    def test_first_wins(self):
        bucket = bucket_of(
            entries(SetData("w", "ch", "n", 20), emitter="w.b.p"),
            entries(SetData("w", "ch", "n", 10), emitter="w.a.p"),
        )
        config, _ = apply_bucket(self.config, bucket, self.config, ConflictPolicy.FIRST_WINS)
        self.assertEqual(10, config.get_entity("w", "ch").data["n"])

    def test_drop_conflicting(self):
        bucket = bucket_of(
            entries(SetData("w", "ch", "n", 10), SetData("w", "ch", "m", 0), emitter="w.a.p"),
            entries(SetData("w", "ch", "n", 20), emitter="w.b.p"),
        )
        config, dropped = apply_bucket(self.config, bucket, self.config, ConflictPolicy.DROP_CONFLICTING)
        self.assertEqual({"n": 1, "m": 0}, config.get_entity("w", "ch").data)
        self.assertEqual(2, len(dropped))

    def test_fail_tick(self):
        bucket = bucket_of(
            entries(SetData("w", "ch", "n", 10), emitter="w.a.p"),
            entries(SetData("w", "ch", "n", 20), emitter="w.b.p"),
        )
        with self.assertRaises(TickAborted) as cm:
            apply_bucket(self.config, bucket, self.config, ConflictPolicy.FAIL_TICK)
        self.assertEqual(4, cm.exception.tick)
        self.assertEqual(1, len(cm.exception.conflicts))

    def test_delete_entity_conflicts_with_everything(self):
        bucket = bucket_of(
            entries(DeleteEntity("w", "ch"), emitter="w.a.p"),
            entries(SetData("w", "ch", "z", 1), emitter="w.b.p"),
        )
        config, dropped = apply_bucket(self.config, bucket, self.config, LWW)
        self.assertEqual(1, config.get_entity("w", "ch").data["z"])
        self.assertEqual([DeleteEntity("w", "ch")], [drop.entry.update for drop in dropped])


class ApplyAllTest(SimpleTestCase):
    def setUp(self):
        self.config = make_config(
            {
                "w": {
                    "corn": {"data": {"x": 1}, "transitions": {"t": "wait(1)\n"}, "processes": {"p": "t"}},
                    "ch": {"processes": {}, "data": {"t": "taken"}},
                    "driver": {},
                }
            },
            tick=2,
        )

    def run_updates(self, *updates, policy=LWW):
        report = CommitReport()
        config = apply_all(self.config, collect_buckets(entries(*updates)), self.config, policy, report)
        return config, report

    def test_tick_advances(self):
        config, _ = self.run_updates()
        self.assertEqual(3, config.tick)
        self.assertEqual(2, self.config.tick)

    def test_new_world_is_usable_in_the_same_tick(self):
        config, report = self.run_updates(
            CreateEntity("hyp", "ada"),
            SetData("hyp", "ada", "food", "curry"),
            AddWorld("hyp"),
        )
        self.assertEqual("curry", config.get_entity("hyp", "ada").data["food"])
        self.assertEqual(3, len(report.committed))
        self.assertEqual(AddWorld("hyp"), report.committed[0].update)

    def test_world_deletion_comes_last(self):
        config, report = self.run_updates(DeleteWorld("w"), SetData("w", "corn", "x", 2))
        self.assertNotIn("w", config.worlds)
        self.assertEqual([SetData("w", "corn", "x", 2), DeleteWorld("w")], [e.update for e in report.committed])

    def test_add_world_from_copies_and_restarts(self):
        config, _ = self.run_updates(AddWorld("hyp", "w"))
        self.assertEqual({"x": 1}, config.get_entity("hyp", "corn").data)
        self.assertEqual(Process("p", "t", 3, 0, READY), config.get_entity("hyp", "corn").processes["p"])

    def test_add_existing_world(self):
        _, report = self.run_updates(AddWorld("w"))
        self.assertEqual([CONFLICT], [drop.reason for drop in report.dropped])

    def test_copy_properties_reads_the_snapshot(self):
        config, _ = self.run_updates(SetData("w", "corn", "x", 2), CopyProperties("w", "corn", "w", "driver"))
        self.assertEqual({"x": 1}, config.get_entity("w", "driver").data)
        self.assertIn("t", config.get_entity("w", "driver").transitions)
        self.assertEqual({}, config.get_entity("w", "driver").processes)

    def test_copy_properties_skips_clashing_keys(self):
        config, _ = self.run_updates(CopyProperties("w", "corn", "w", "ch"))
        ch = config.get_entity("w", "ch")
        self.assertEqual({"t": "taken", "x": 1}, ch.data)
        self.assertEqual({}, ch.transitions)

    def test_copy_selected_keys(self):
        config, _ = self.run_updates(CopyProperties("w", "corn", "w", "driver", ("t", "nothing")))
        driver = config.get_entity("w", "driver")
        self.assertEqual({}, driver.data)
        self.assertEqual(["t"], list(driver.transitions))

    def test_macros_must_be_expanded(self):
        with self.assertRaises(TypeError):
            apply_all(self.config, [UpdateBucket(("w", "driver"), entries(Macro("mv_up")))], self.config)


##############################
# Randomized oracle checks   #
##############################
WORLDS = ("w1", "w2", "w3")
ENTITIES = ("e1", "e2", "e3", "e4", "e5")
DATA_KEYS = ("a", "b", "p")
PROCESS_NAMES = ("p", "q")
TRANSITIONS = ("t", "u")
EMITTERS = tuple(Path.parse(spec) for spec in ("w1.e1.p", "w1.e2.q", "w2.e1.p", "w3.e5.q"))


def random_config(rng):
    worlds = {}
    for world in rng.sample(WORLDS, rng.randint(1, 3)):
        entities = {}
        for name in rng.sample(ENTITIES, rng.randint(1, 5)):
            data = {key: rng.randint(0, 3) for key in ("a", "b") if rng.random() < 0.6}
            transitions = {t: "wait(1)\n" for t in TRANSITIONS if rng.random() < 0.7}
            processes = {}
            if transitions and rng.random() < 0.6:
                processes["p"] = rng.choice(sorted(transitions))
            entities[name] = {"data": data, "transitions": transitions, "processes": processes}
        worlds[world] = entities
    config = make_config(worlds, tick=rng.randint(0, 5))
    for _, entity, process in list(config.iter_processes()):
        entity.processes[process.name] = Process(process.name, process.transition, 0, rng.randint(0, 3), READY)
    return config


def random_update(rng, world, entity):
    kind = rng.randrange(6)
    if kind == 0:
        update = SetData(world, entity, rng.choice(DATA_KEYS), rng.randint(0, 3))
    elif kind == 1:
        update = DeleteData(world, entity, rng.choice(DATA_KEYS))
    elif kind == 2:
        update = StartProcess(world, entity, rng.choice(PROCESS_NAMES), rng.choice(TRANSITIONS + ("v",)))
    elif kind == 3:
        update = CancelProcess(world, entity, rng.choice(PROCESS_NAMES))
    elif kind == 4:
        update = RebindProcess(world, entity, rng.choice(PROCESS_NAMES), rng.choice(TRANSITIONS))
    else:
        update = DeleteEntity(world, entity)
    if rng.random() < 0.25:
        path = Path(rng.choice(WORLDS), rng.choice(ENTITIES), "a")
        guard = Exists(path) if rng.random() < 0.5 else Equals(path, rng.randint(0, 3))
        update = Guarded(guard, update)
    return update


def random_entries(rng, targets):
    result = []
    for world, entity in targets:
        for _ in range(rng.randint(1, 8)):
            result.append(BucketEntry(rng.choice(EMITTERS), len(result), random_update(rng, world, entity)))
    return result


def as_plain(config):
    return {
        world_name: {
            name: {
                "data": dict(entity.data),
                "transitions": sorted(entity.transitions),
                "processes": {
                    key: (process.transition, process.begin_tick, process.iteration)
                    for key, process in entity.processes.items()
                },
            }
            for name, entity in world.entities.items()
        }
        for world_name, world in config.worlds.items()
    }


def written(update):
    if isinstance(update, DeleteEntity):
        return None
    return getattr(update, "key", None) or update.process


def clash(a, b):
    wa, wb = written(a), written(b)
    return wa is None or wb is None or wa == wb


def survivors(updates, policy):
    """The updates a conflict policy keeps, found the slow way."""
    if policy is ConflictPolicy.DROP_CONFLICTING:
        return [
            u for i, u in enumerate(updates) if not any(clash(u, v) for j, v in enumerate(updates) if i != j)
        ]
    order = list(updates) if policy is ConflictPolicy.FIRST_WINS else list(reversed(updates))
    kept = []
    for update in order:
        if not any(clash(update, other) for other in kept):
            kept.append(update)
    return [u for u in updates if any(u is k for k in kept)]


def guard_holds(guard, plain):
    entity = plain.get(guard.path.world, {}).get(guard.path.entity)
    if entity is None or guard.path.property not in entity["data"]:
        return False
    if isinstance(guard, Exists):
        return True
    return entity["data"][guard.path.property] == guard.value


def oracle_apply(plain, update, next_tick):
    entity = plain.get(update.world, {}).get(update.entity)
    if entity is None:
        return
    data, transitions, processes = entity["data"], entity["transitions"], entity["processes"]
    if isinstance(update, SetData):
        if update.key not in processes:
            data[update.key] = update.value
    elif isinstance(update, DeleteData):
        data.pop(update.key, None)
    elif isinstance(update, StartProcess):
        name = update.process
        if update.transition in transitions and name not in processes and name not in data:
            processes[name] = (update.transition, next_tick, 0)
    elif isinstance(update, CancelProcess):
        processes.pop(update.process, None)
    elif isinstance(update, RebindProcess):
        running = processes.get(update.process)
        if running is not None and running[0] != update.transition:
            processes[update.process] = (update.transition, next_tick, running[2])
    elif isinstance(update, DeleteEntity):
        del plain[update.world][update.entity]


def oracle(config, entries_, policy):
    snapshot = as_plain(config)
    plain = copy.deepcopy(snapshot)
    targets = sorted({entry.update.target() for entry in entries_})
    for target in targets:
        ordered = sorted((e for e in entries_ if e.update.target() == target), key=BucketEntry.sort_key)
        passed = []
        for entry in ordered:
            update = entry.update
            if isinstance(update, Guarded):
                if not guard_holds(update.guard, snapshot):
                    continue
                update = update.inner
            passed.append(update)
        kept = survivors(passed, policy)
        kept.sort(key=lambda update: isinstance(update, DeleteEntity))
        for update in kept:
            oracle_apply(plain, update, config.tick + 1)
    return plain


class UpdateFunctionOracleTest(SimpleTestCase):
    POLICIES = (ConflictPolicy.LAST_WRITER_WINS, ConflictPolicy.FIRST_WINS, ConflictPolicy.DROP_CONFLICTING)

    def test_apply_all_matches_sequential_application(self):
        rng = random.Random(20240611)
        for case in range(1000):
            config = random_config(rng)
            targets = set()
            for _ in range(rng.randint(1, 4)):
                world = rng.choice(sorted(config.worlds))
                entity = rng.choice(sorted(config.worlds[world].entities) + ["ghost"])
                targets.add((world, entity))
            batch = random_entries(rng, sorted(targets))
            rng.shuffle(batch)
            policy = self.POLICIES[case % 3]
            result = apply_all(config, collect_buckets(batch), config, policy)
            self.assertEqual(oracle(config, batch, policy), as_plain(result), "case %d" % case)


class BucketCommutativityTest(SimpleTestCase):
    def test_disjoint_buckets_commute(self):
        rng = random.Random(99)
        for case in range(1000):
            config = random_config(rng)
            world = rng.choice(sorted(config.worlds))
            names = sorted(config.worlds[world].entities) + ["ghost"]
            first, second = rng.sample(names, 2)
            one = UpdateBucket((world, first), random_entries(rng, [(world, first)]))
            two = UpdateBucket((world, second), random_entries(rng, [(world, second)]))

            a, _ = apply_bucket(config, one, config)
            a, _ = apply_bucket(a, two, config)
            b, _ = apply_bucket(config, two, config)
            b, _ = apply_bucket(b, one, config)
            self.assertEqual(dump_document(to_document(a)), dump_document(to_document(b)), "case %d" % case)
