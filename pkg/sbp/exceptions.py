from django.core.exceptions import ValidationError


class SbpError(Exception):
    def __init__(self, msg):
        super(SbpError, self).__init__(msg)
        self.msg = msg


# core-model


class NotFound(SbpError):
    """A path could not be resolved; `segment` names the first missing part
    ("world", "entity" or "property")."""

    def __init__(self, segment, path):
        super(NotFound, self).__init__("No %s for path %s" % (segment, path))
        self.segment = segment
        self.path = path


class SourceMissing(SbpError):
    pass


class TargetExists(SbpError):
    pass


# update-engine


class UnknownMacro(SbpError):
    def __init__(self, name):
        super(UnknownMacro, self).__init__("Unknown macro %r" % name)
        self.name = name


class ExpansionFailure(SbpError):
    def __init__(self, macro, reason):
        super(ExpansionFailure, self).__init__(
            "Expansion of %r failed: %s" % (macro, reason)
        )
        self.macro = macro
        self.reason = reason


class TickAborted(SbpError):
    def __init__(self, tick, conflicts):
        super(TickAborted, self).__init__(
            "Tick %d aborted with %d conflicting update(s)" % (tick, len(conflicts))
        )
        self.tick = tick
        self.conflicts = conflicts


class TargetMissing(SbpError):
    pass


# tdl / semantics


class RuntimeFault(SbpError):
    def __init__(self, span, reason):
        if span is not None:
            msg = "line %d, column %d: %s" % (span.line, span.column, reason)
        else:
            msg = reason
        super(RuntimeFault, self).__init__(msg)
        self.span = span
        self.reason = reason


class MissingPath(RuntimeFault):
    """A path was read as a value but does not resolve."""


class UnknownSemantics(SbpError):
    def __init__(self, semantics_id):
        super(UnknownSemantics, self).__init__(
            "No semantics registered as %r" % semantics_id
        )
        self.semantics_id = semantics_id


class ExternalTimeout(SbpError):
    pass


class ProtocolError(SbpError):
    pass


class WallclockExceeded(SbpError):
    def __init__(self, tick, seconds):
        super(WallclockExceeded, self).__init__(
            "Run stopped at tick %d after %.1f seconds of wall-clock time" % (tick, seconds)
        )
        self.tick = tick
        self.seconds = seconds


class SemanticsFailure(SbpError):
    def __init__(self, path, reason):
        super(SemanticsFailure, self).__init__("%s: %s" % (path, reason))
        self.path = path
        self.reason = reason


# scenario-io


class SchemaError(ValidationError):
    """The document does not follow the scenario/snapshot schema.

    `where` is the location inside the document, e.g. "worlds.w.ch.data".
    """

    def __init__(self, where, message):
        super(SchemaError, self).__init__("%s: %s" % (where, message))
        self.where = where


class TdlError(ValidationError):
    def __init__(self, entity, transition, diagnostics):
        super(TdlError, self).__init__(
            [
                "%s.%s: %s" % (entity, transition, diagnostic)
                for diagnostic in diagnostics
            ]
        )
        self.entity = entity
        self.transition = transition
        self.diagnostics = diagnostics


class InvalidConfiguration(ValidationError):
    def __init__(self, violations):
        super(InvalidConfiguration, self).__init__(
            [str(violation) for violation in violations]
        )
        self.violations = violations
