"""Turn a TDL tree back into source text that parses to an equal tree."""
import json

from ..utils import render_name
from ..values import render_float
from . import nodes as n

INDENT = "    "

PRECEDENCE = {
    "or": 1,
    "and": 2,
    "not": 3,
    "==": 4,
    "!=": 4,
    "<": 4,
    "<=": 4,
    ">": 4,
    ">=": 4,
    "+": 5,
    "-": 5,
    "*": 6,
    "/": 6,
    "%": 6,
}
UNARY = 7
POSTFIX = 8


def precedence(node):
    if isinstance(node, n.Binary):
        return PRECEDENCE[node.op]
    if isinstance(node, n.Unary):
        return PRECEDENCE["not"] if node.op == "not" else UNARY
    return POSTFIX


def _wrap(node, needed):
    text = print_expression(node)
    if precedence(node) < needed:
        return "(%s)" % text
    return text


def print_literal(value):
    if value is None:
        return "unit"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return render_float(value)
    return json.dumps(value, ensure_ascii=False)


def _attr_name(name):
    # Attribute names follow '.', where any identifier (keywords included) is fine.
    return render_name(name)


def print_expression(node):
    if isinstance(node, n.Literal):
        return print_literal(node.value)
    if isinstance(node, n.CoordExpr):
        return "(%s, %s)" % (print_expression(node.x), print_expression(node.y))
    if isinstance(node, n.ListExpr):
        return "[%s]" % ", ".join(print_expression(item) for item in node.items)
    if isinstance(node, n.Me):
        return node.word
    if isinstance(node, n.MyWorld):
        return "myworld"
    if isinstance(node, n.WorldCall):
        return "world(%s)" % print_expression(node.name)
    if isinstance(node, n.Var):
        return node.name
    if isinstance(node, n.Param):
        return "$" + node.name
    if isinstance(node, n.Attr):
        return "%s.%s" % (_wrap(node.obj, POSTFIX), _attr_name(node.name))
    if isinstance(node, n.Index):
        return "%s[%s]" % (_wrap(node.obj, POSTFIX), print_expression(node.key))
    if isinstance(node, n.Unary):
        if node.op == "not":
            return "not " + _wrap(node.operand, PRECEDENCE["not"])
        return "-" + _wrap(node.operand, UNARY)
    if isinstance(node, n.Binary):
        p = PRECEDENCE[node.op]
        # Comparisons do not chain, so equal precedence needs parentheses on both sides.
        left_needed = p + 1 if p == PRECEDENCE["=="] else p
        return "%s %s %s" % (_wrap(node.left, left_needed), node.op, _wrap(node.right, p + 1))
    if isinstance(node, n.Range):
        return "%s..%s" % (print_expression(node.low), print_expression(node.high))
    if isinstance(node, n.Call):
        return "%s(%s)" % (node.func, ", ".join(print_expression(arg) for arg in node.args))
    raise TypeError("Not an expression node: %r" % (node,))


def print_guard(guard):
    if isinstance(guard, n.GuardExists):
        return "exists(%s)" % print_expression(guard.path)
    if isinstance(guard, n.GuardMissing):
        return "missing(%s)" % print_expression(guard.path)
    return "%s %s %s" % (
        _wrap(guard.path, PRECEDENCE["+"]),
        guard.op,
        _wrap(guard.value, PRECEDENCE["+"]),
    )


def print_update(node):
    if isinstance(node, n.GuardedExpr):
        return "when %s do %s" % (print_guard(node.guard), print_update(node.core))
    if isinstance(node, n.MacroCall):
        if not node.args:
            return node.name
        return "%s(%s)" % (node.name, ", ".join(print_expression(arg) for arg in node.args))
    kind = node.kind
    target = print_expression(node.target)
    if kind in ("set_data", "set_transition"):
        return "%s %s = %s" % (kind, target, print_expression(node.value))
    if kind in ("start_process", "rebind_process"):
        return "%s %s <- %s" % (kind, target, print_expression(node.value))
    if kind == "add_world" and node.value is not None:
        return "add_world %s from %s" % (target, print_expression(node.value))
    if kind == "copy_properties":
        destination = _wrap(node.value, UNARY)
        if node.keys is None:
            return "copy_properties %s -> %s *" % (target, destination)
        return "copy_properties %s -> %s only [%s]" % (
            target,
            destination,
            ", ".join(print_expression(key) for key in node.keys),
        )
    return "%s %s" % (kind, target)


def _print_updates(updates):
    return "{%s}" % ", ".join(print_update(update) for update in updates)


def _print_block(body, depth):
    lines = ["{"]
    lines.extend(_print_statements(body, depth + 1))
    lines.append(INDENT * depth + "}")
    return lines


def _join_block(head, body, depth):
    block = _print_block(body, depth)
    return [head + " " + block[0]] + block[1:]


def _print_statement(stmt, depth):
    pad = INDENT * depth
    if isinstance(stmt, n.Wait):
        return [pad + "wait(%s)" % print_expression(stmt.ticks)]
    if isinstance(stmt, n.Let):
        return [pad + "let %s = %s" % (stmt.name, print_expression(stmt.value))]
    if isinstance(stmt, n.Return):
        stop = "stop " if stmt.stop else ""
        return [pad + "return " + stop + _print_updates(stmt.updates)]
    if isinstance(stmt, n.Emit):
        return [pad + "emit " + _print_updates(stmt.updates)]
    if isinstance(stmt, n.Await):
        return [pad + "await " + print_expression(stmt.target)]
    if isinstance(stmt, n.If):
        lines = _join_block(pad + "if " + print_expression(stmt.cond), stmt.body, depth)
        if stmt.orelse is not None:
            if len(stmt.orelse) == 1 and isinstance(stmt.orelse[0], n.If):
                chained = _print_statement(stmt.orelse[0], depth)
                lines[-1] += " else " + chained[0].lstrip()
                lines.extend(chained[1:])
            else:
                block = _print_block(stmt.orelse, depth)
                lines[-1] += " else " + block[0]
                lines.extend(block[1:])
        return lines
    if isinstance(stmt, n.Switch):
        lines = [pad + "switch %s {" % print_expression(stmt.subject)]
        inner = INDENT * (depth + 1)
        for case in stmt.cases:
            lines.extend(_join_block(inner + "case " + print_literal(case.value.value), case.body, depth + 1))
        if stmt.default is not None:
            lines.extend(_join_block(inner + "default", stmt.default, depth + 1))
        lines.append(pad + "}")
        return lines
    if isinstance(stmt, n.Select):
        head = pad + "select %s in %s" % (stmt.binder, print_expression(stmt.source))
        if stmt.where is not None:
            head += " where " + print_expression(stmt.where)
        if stmt.minimizing is not None:
            head += " minimizing " + print_expression(stmt.minimizing)
        lines = _join_block(head, stmt.body, depth)
        if stmt.orelse is not None:
            block = _print_block(stmt.orelse, depth)
            lines[-1] += " else " + block[0]
            lines.extend(block[1:])
        return lines
    raise TypeError("Not a statement node: %r" % (stmt,))


def _print_statements(body, depth):
    lines = []
    for stmt in body:
        lines.extend(_print_statement(stmt, depth))
    return lines


def pretty_print(program):
    """Render a Program as TDL source, one statement per line."""
    lines = _print_statements(program.body, 0)
    return "\n".join(lines) + ("\n" if lines else "")
