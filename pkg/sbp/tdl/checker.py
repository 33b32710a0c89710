from . import nodes as n
from .lexer import Diagnostic

ARITY = {
    "abs": (1, 1),
    "distance": (2, 2),
    "contains": (2, 2),
    "randomValue": (1, 1),
    "exists": (1, 1),
    "len": (1, 1),
    "min": (1, None),
    "max": (1, None),
}


class Checker(object):
    """
    Static checks on a parsed tree. `macros` maps the macro names a scenario
    declares to their arity; None skips the macro checks. `params` is the
    parameter list when checking a macro template, None otherwise.
    """

    def __init__(self, macros=None, params=None):
        self.macros = macros
        self.params = params
        self.diagnostics = []

    def error(self, node, message):
        self.diagnostics.append(Diagnostic("error", message, node.span))

    def warning(self, node, message):
        self.diagnostics.append(Diagnostic("warning", message, node.span))

    # Statements

    def block(self, body, scope):
        scope = set(scope)
        for index, stmt in enumerate(body):
            self.statement(stmt, scope)
            if isinstance(stmt, n.Return) and index + 1 < len(body):
                self.warning(body[index + 1], "unreachable statement after return")
                break
        return scope

    def statement(self, stmt, scope):
        if isinstance(stmt, n.Wait):
            self.expression(stmt.ticks, scope)
        elif isinstance(stmt, n.Let):
            self.expression(stmt.value, scope)
            scope.add(stmt.name)
        elif isinstance(stmt, n.If):
            self.expression(stmt.cond, scope)
            self.block(stmt.body, scope)
            if stmt.orelse is not None:
                self.block(stmt.orelse, scope)
        elif isinstance(stmt, n.Switch):
            self.expression(stmt.subject, scope)
            seen = []
            for case in stmt.cases:
                if any(case.value == other for other in seen):
                    self.warning(case, "duplicate case %r" % (case.value.value,))
                seen.append(case.value)
                self.block(case.body, scope)
            if stmt.default is not None:
                self.block(stmt.default, scope)
        elif isinstance(stmt, n.Select):
            self.expression(stmt.source, scope)
            inner = scope | {stmt.binder}
            if stmt.where is not None:
                self.expression(stmt.where, inner)
            if stmt.minimizing is not None:
                self.expression(stmt.minimizing, inner)
            self.block(stmt.body, inner)
            if stmt.orelse is not None:
                self.block(stmt.orelse, scope)
        elif isinstance(stmt, (n.Return, n.Emit)):
            for update in stmt.updates:
                self.update(update, scope)
        elif isinstance(stmt, n.Await):
            if not isinstance(stmt.target, (n.Attr, n.Index)):
                self.error(stmt, "await needs the path of a process, like w.e.p")
            self.expression(stmt.target, scope)

    # Updates

    def update(self, node, scope):
        if isinstance(node, n.MacroCall):
            if self.params is not None:
                self.error(node, "macro templates cannot use other macros ('%s')" % node.name)
            elif self.macros is not None:
                if node.name not in self.macros:
                    self.error(node, "unknown update '%s'" % node.name)
                elif self.macros[node.name] != len(node.args):
                    self.error(
                        node,
                        "'%s' takes %d argument(s), %d given"
                        % (node.name, self.macros[node.name], len(node.args)),
                    )
            for arg in node.args:
                self.expression(arg, scope)
            return
        if isinstance(node, n.GuardedExpr):
            guard = node.guard
            self.expression(guard.path, scope)
            if isinstance(guard, n.GuardCompare):
                self.expression(guard.value, scope)
            node = node.core
        self.expression(node.target, scope)
        if node.value is not None and not _names_transition(node):
            self.expression(node.value, scope)
        for key in node.keys or ():
            self.expression(key, scope)

    # Expressions

    def expression(self, node, scope):
        if isinstance(node, n.Var):
            if node.name not in scope:
                self.error(node, "'%s' is not bound here" % node.name)
        elif isinstance(node, n.Param):
            if self.params is None:
                self.error(node, "'$%s' can only be used in macro templates" % node.name)
            elif node.name not in self.params:
                self.error(node, "'$%s' is not a parameter of this macro" % node.name)
        elif isinstance(node, n.Call):
            self.call(node, scope)
        elif isinstance(node, n.Range):
            self.error(node, "a range is only allowed as the argument of randomValue")
        elif isinstance(node, n.CoordExpr):
            self.expression(node.x, scope)
            self.expression(node.y, scope)
        elif isinstance(node, n.ListExpr):
            for item in node.items:
                self.expression(item, scope)
        elif isinstance(node, n.WorldCall):
            self.expression(node.name, scope)
        elif isinstance(node, n.Attr):
            self.expression(node.obj, scope)
        elif isinstance(node, n.Index):
            self.expression(node.obj, scope)
            self.expression(node.key, scope)
        elif isinstance(node, n.Unary):
            self.expression(node.operand, scope)
        elif isinstance(node, n.Binary):
            self.expression(node.left, scope)
            self.expression(node.right, scope)

    def call(self, node, scope):
        if node.func not in ARITY:
            self.error(node, "unknown built-in '%s'" % node.func)
        else:
            low, high = ARITY[node.func]
            count = len(node.args)
            if count < low or (high is not None and count > high):
                self.error(node, "wrong number of arguments to %s" % node.func)
        for arg in node.args:
            if isinstance(arg, n.Range) and node.func == "randomValue":
                self.expression(arg.low, scope)
                self.expression(arg.high, scope)
            else:
                self.expression(arg, scope)


def _names_transition(update):
    # `start_process p <- walk`: an unbound name is taken literally
    return update.kind in ("start_process", "rebind_process") and isinstance(update.value, n.Var)


def check(program, macros=None):
    """Return the diagnostics for a parsed program; errors and warnings."""
    checker = Checker(macros)
    checker.block(program.body, set())
    return checker.diagnostics


def check_template(update, params):
    """Check one macro template update against the macro's parameter names."""
    checker = Checker(params=tuple(params))
    checker.update(update, set())
    return checker.diagnostics
