"""
The `sbp` management command:

    manage.py sbp run chicken.scenario --seed 42 --ticks 10000
    manage.py sbp validate broken.scenario
    manage.py sbp inspect run.snapshot w.chicken1.loc
    manage.py sbp replay-check chicken.scenario --seed 42 --ticks 10000 --expected 3f1c...
    manage.py sbp build chicken --output sbp/fixtures/chicken.scenario

Outside a Django project the same command is installed as `sbp`
(see sbp.cli). Errors leave with distinct exit codes:

    1  usage error
    2  the scenario or snapshot does not load or validate
    3  the run failed (a FailTick conflict or the wall-clock watchdog)
    4  replay-check computed a different hash
"""
import logging
import os
from dataclasses import replace

from django.core.exceptions import ValidationError
from django.core.management.base import BaseCommand, CommandError

from sbp.exceptions import NotFound, TickAborted, WallclockExceeded
from sbp.model import Entity, Process, TransitionDescription, World, resolve_path
from sbp.scenario import SNAPSHOT_SUFFIX, dump_document, load_scenario, read_snapshot, save_snapshot
from sbp.scenarios import FIXTURES, build_fixture
from sbp.scheduler import GENESIS_HASH, run
from sbp.trace import FileTraceSink
from sbp.updates import ConflictPolicy
from sbp.utils import setting
from sbp.values import render_value

USAGE = 1
INVALID = 2
RUN_FAILED = 3
MISMATCH = 4

LOG_LEVELS = {0: logging.ERROR, 1: logging.WARNING, 2: logging.INFO, 3: logging.DEBUG}


def _invalid(error):
    return CommandError("\n".join(error.messages), returncode=INVALID)


class Command(BaseCommand):
    help = "Run, validate and inspect simulation scenarios."
    requires_system_checks = []

    def add_arguments(self, parser):
        actions = parser.add_subparsers(dest="action", title="actions", required=True)

        run_parser = actions.add_parser("run", help="Run a scenario or resume a snapshot.")
        run_parser.add_argument("scenario", nargs="?", help="a .scenario file")
        self.add_run_options(run_parser)
        run_parser.add_argument("--trace", help="write the trace to this file")
        run_parser.add_argument(
            "--snapshot-every", type=int, metavar="N", help="save a snapshot every N ticks"
        )
        run_parser.add_argument("--snapshot-dir", default=".", help="where --snapshot-every writes")
        run_parser.add_argument("--final-snapshot", metavar="PATH", help="save the final configuration")
        run_parser.add_argument(
            "--external", metavar="CHANNEL", help="stdio, tcp:HOST:PORT or script:NAME for every external binding"
        )
        run_parser.add_argument("--resume", metavar="SNAPSHOT", help="continue from a snapshot")
        run_parser.add_argument("--workers", type=int, help="threads running the segments of a tick")

        validate_parser = actions.add_parser("validate", help="Load a scenario and report its diagnostics.")
        validate_parser.add_argument("scenario")

        inspect_parser = actions.add_parser("inspect", help="Print the item at a path of a snapshot.")
        inspect_parser.add_argument("snapshot")
        inspect_parser.add_argument("path", help="world, world.entity or world.entity.property")

        check_parser = actions.add_parser("replay-check", help="Run a scenario and compare its replay hash.")
        check_parser.add_argument("scenario")
        self.add_run_options(check_parser)
        check_parser.add_argument("--expected", required=True, help="the replay hash the run must produce")

        build_parser = actions.add_parser("build", help="Write a shipped scenario from its builder.")
        build_parser.add_argument("name", choices=sorted(FIXTURES))
        build_parser.add_argument("--output", help="file to write (default: standard output)")

    def add_run_options(self, parser):
        parser.add_argument("--seed", type=int, help="root seed (default: the document's, else 0)")
        parser.add_argument("--ticks", type=int, help="stop after this many ticks")
        parser.add_argument("--policy", help="conflict policy, overriding the document's")
        parser.add_argument(
            "--wallclock-limit",
            type=float,
            metavar="SECONDS",
            default=setting("WALLCLOCK_LIMIT"),
            help="abort runs that take longer than this",
        )

    def handle(self, *args, **options):
        logging.getLogger("sbp").setLevel(LOG_LEVELS.get(options["verbosity"], logging.DEBUG))
        action = options["action"].replace("-", "_")
        getattr(self, "handle_%s" % action)(options)

    # Loading

    def load(self, path, snapshot=False):
        try:
            if snapshot:
                return read_snapshot(path)
            return load_scenario(path)
        except OSError as e:
            raise CommandError("Cannot read %s: %s" % (path, e.strerror), returncode=USAGE)
        except ValidationError as e:
            raise _invalid(e)

    # run / replay-check

    def seeded(self, settings, options):
        seed = options["seed"]
        if seed is None:
            seed = settings.seed or 0
        return replace(settings, seed=seed)

    def execute_run(self, config, settings, options, sinks=(), on_tick=None, channel=None):
        try:
            policy = ConflictPolicy.parse(options["policy"] or settings.policy)
        except ValueError as e:
            raise CommandError(str(e), returncode=USAGE)
        host = settings.host(channel_override=channel)
        try:
            return run(
                config,
                root_seed=settings.seed,
                max_ticks=options["ticks"],
                policy=policy,
                sinks=sinks,
                macros=settings.macros,
                host=host,
                replay_hash=settings.replay_hash or GENESIS_HASH,
                wallclock_limit=options["wallclock_limit"],
                on_tick=on_tick,
                workers=options.get("workers"),
            )
        except ValidationError as e:
            raise _invalid(e)
        except (TickAborted, WallclockExceeded) as e:
            raise CommandError(e.msg, returncode=RUN_FAILED)
        finally:
            host.close()

    def trace_path(self, options):
        if options["trace"]:
            return options["trace"]
        directory = setting("TRACE_DIR") or os.environ.get("SBP_TRACE_DIR")
        if not directory:
            return None
        source = options["scenario"] or options["resume"]
        stem = os.path.splitext(os.path.basename(source))[0]
        return os.path.join(directory, stem + ".trace")

    def handle_run(self, options):
        if bool(options["scenario"]) == bool(options["resume"]):
            raise CommandError("Give either a scenario or --resume SNAPSHOT", returncode=USAGE)
        if options["resume"]:
            config, settings = self.load(options["resume"], snapshot=True)
        else:
            config, settings = self.load(options["scenario"])
        settings = self.seeded(settings, options)

        every = options["snapshot_every"]
        if every is not None and every < 1:
            raise CommandError("--snapshot-every must be positive", returncode=USAGE)

        def save_every(state):
            if state.config.tick % every == 0:
                path = os.path.join(options["snapshot_dir"], "tick%06d%s" % (state.config.tick, SNAPSHOT_SUFFIX))
                save_snapshot(state.config, replace(settings, replay_hash=state.replay_hash), path)

        sinks = []
        trace_path = self.trace_path(options)
        if trace_path:
            sinks.append(FileTraceSink(trace_path))
        try:
            final, summary = self.execute_run(
                config,
                settings,
                options,
                sinks=sinks,
                on_tick=save_every if every else None,
                channel=options["external"],
            )
        finally:
            for sink in sinks:
                sink.close()

        if options["final_snapshot"]:
            save_snapshot(final, replace(settings, replay_hash=summary.replay_hash), options["final_snapshot"])
        # With --external stdio our stdout belongs to the driver.
        out = self.stderr if options["external"] == "stdio" else self.stdout
        out.write(str(summary))

    def handle_replay_check(self, options):
        config, settings = self.load(options["scenario"])
        _, summary = self.execute_run(config, self.seeded(settings, options), options)
        if summary.replay_hash != options["expected"]:
            raise CommandError(
                "Replay hash %s does not match the expected %s" % (summary.replay_hash, options["expected"]),
                returncode=MISMATCH,
            )
        self.stdout.write(summary.replay_hash)

    # validate / inspect / build

    def handle_validate(self, options):
        config, settings = self.load(options["scenario"])
        for warning in settings.warnings:
            self.stdout.write("warning: %s" % warning)
        entities = sum(len(world.entities) for world in config.worlds.values())
        self.stdout.write(
            "%s: ok (%d worlds, %d entities, %d processes)"
            % (options["scenario"], len(config.worlds), entities, config.count_processes())
        )

    def handle_inspect(self, options):
        config = self.load(options["snapshot"], snapshot=True)[0]
        try:
            item = resolve_path(config, options["path"])
        except NotFound as e:
            raise CommandError(e.msg, returncode=USAGE)
        except ValidationError as e:
            raise CommandError("\n".join(e.messages), returncode=USAGE)
        self.stdout.write(describe(item))

    def handle_build(self, options):
        text = dump_document(build_fixture(options["name"]))
        if options["output"]:
            with open(options["output"], "w", encoding="utf-8") as f:
                f.write(text)
            self.stdout.write("Wrote %s" % options["output"])
        else:
            self.stdout.write(text, ending="")


def describe(item):
    """The text `inspect` prints: canonical values, short summaries otherwise."""
    if isinstance(item, World):
        return "\n".join(sorted(item.entities))
    if isinstance(item, Entity):
        lines = ["data %s = %s" % (key, render_value(item.data[key])) for key in sorted(item.data)]
        lines += ["transition %s" % key for key in sorted(item.transitions)]
        lines += ["process %s" % key for key in sorted(item.processes)]
        return "\n".join(lines)
    if isinstance(item, TransitionDescription):
        return "%s\n%s" % (item.semantics, item.source)
    if isinstance(item, Process):
        return "%s iteration %d since %d: %r" % (item.transition, item.iteration, item.begin_tick, item.state)
    return render_value(item)

