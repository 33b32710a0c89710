"""
Names in a simulation are referred to with a path-like notation using
the "." operator:

    w            the world named "w"
    w.ch         the entity "ch" in world "w"
    w.ch.loc     the property "loc" (a data entry, transition description
                 or process) of that entity

The helpers below split and validate that notation. Because "." separates
segments it can never be part of a name; whitespace and control characters
are excluded as well so that names survive every textual format we write
(trace lines, snapshots, update text).

Names that are not plain identifiers are still legal, they just have to be
quoted wherever a path is rendered as text, see `render_name`.
"""
import inspect
import json
import re

from django.conf import settings
from django.core.exceptions import ValidationError

IDENTIFIER_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_']*$")

"""
About settings.

You can provide a Django setting named SBP as a dictionary.
Here are the settings, all currently optional:

DEFAULT_POLICY: conflict policy used when neither scenario nor CLI names one
TRACE_DIR: default directory for .trace files
WORKERS: number of threads running the segments of one tick
DEBUG_CHECKS: check model invariants at every tick boundary
EXTERNAL_TIMEOUT_TICKS: default timeout of external semantics bindings
WALLCLOCK_LIMIT: default CLI watchdog, in seconds
"""


# Helper to get settings from SBP dictionary, or default
def setting(name, default=None):
    SBP = getattr(settings, "SBP", {})
    return SBP.get(name, default)


def is_valid_name(name):
    if not isinstance(name, str) or not name:
        return False
    for c in name:
        if c == "." or c.isspace() or not c.isprintable():
            return False
    return True


def validate_name(name):
    """
    Raises a ValidationError with a useful message if `name` can't be used
    as the name of a world, entity or property. Otherwise just returns it.
    """
    if not isinstance(name, str):
        raise ValidationError("Names must be strings; got %r" % (name,))
    if not name:
        raise ValidationError("Names must not be empty")
    if not is_valid_name(name):
        raise ValidationError(
            "%r is not a valid name: names may not contain '.', whitespace "
            "or control characters" % name
        )
    return name


def render_name(name):
    if IDENTIFIER_RE.match(name):
        return name
    return json.dumps(name, ensure_ascii=False)


def split_path(spec):
    """
    Split a textual path into its 1 to 3 segments.

    Quoted segments (as produced by `render_name`) are unquoted.
    """
    if not isinstance(spec, str) or not spec:
        raise ValidationError("Empty path")
    parts = []
    rest = spec
    while True:
        if rest.startswith('"'):
            decoder = json.JSONDecoder()
            try:
                name, end = decoder.raw_decode(rest)
            except ValueError:
                raise ValidationError("Unterminated quoted name in path %r" % spec)
            rest = rest[end:]
        else:
            name, _, tail = rest.partition(".")
            rest = "." + tail if _ else ""
        parts.append(validate_name(name))
        if not rest:
            break
        if not rest.startswith("."):
            raise ValidationError("Expected '.' after %r in path %r" % (name, spec))
        rest = rest[1:]
        if not rest:
            raise ValidationError("Path %r ends with '.'" % spec)
    if len(parts) > 3:
        raise ValidationError(
            "Path %r has %d segments; at most 3 (world.entity.property) are allowed"
            % (spec, len(parts))
        )
    return parts


def has_required_args(func):
    """
    Count the positional arguments a caller must pass to `func` (those
    without defaults, 'self' excluded); 0 means it can be called bare.
    Native behaviours must take exactly one, the invocation context.
    """
    spec = inspect.getfullargspec(func)
    num_args = len(spec.args)
    # If first arg is 'self', we can ignore one arg
    if num_args and spec.args[0] == "self":
        num_args -= 1
    # If there are defaults, we can ignore the same number of args
    if spec.defaults:
        num_args -= len(spec.defaults)
    return num_args
