"""
The `sbp` console script: the management command without a Django project.
"""
import sys

import django
from django.conf import settings
from django.core.management.base import CommandError

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "handlers": {"console": {"class": "logging.StreamHandler"}},
    "loggers": {"sbp": {"handlers": ["console"], "level": "WARNING"}},
}


def configure():
    if not settings.configured:
        settings.configure(INSTALLED_APPS=["sbp"], LOGGING=LOGGING)
    django.setup()


def main(argv=None):
    """Run `sbp ACTION ...` and return the exit code."""
    if argv is None:
        argv = sys.argv[1:]
    configure()
    from sbp.management.commands.sbp import Command

    command = Command()
    parser = command.create_parser("sbp", "sbp")
    try:
        options = vars(parser.parse_args(list(argv)))
        args = options.pop("args", ())
        command.execute(*args, **options)
    except CommandError as e:
        sys.stderr.write("%s\n" % e)
        return e.returncode
    except SystemExit as e:
        # --help
        return e.code or 0
    return 0


if __name__ == "__main__":
    sys.exit(main())
