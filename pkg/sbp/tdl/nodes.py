"""
The TDL syntax tree.

Nodes are immutable. Spans are excluded from equality so that a tree
printed and parsed again compares equal to the original.
"""
from dataclasses import dataclass, field
from typing import Optional, Tuple

from .lexer import Span

NO_SPAN = Span(0, 0, 0, 0)


def _span():
    return field(default=NO_SPAN, compare=False, repr=False)


#############
# Expressions
#############
@dataclass(frozen=True)
class Literal:
    value: object
    span: Span = _span()


@dataclass(frozen=True)
class CoordExpr:
    x: object
    y: object
    span: Span = _span()


@dataclass(frozen=True)
class ListExpr:
    items: Tuple = ()
    span: Span = _span()


@dataclass(frozen=True)
class Me:
    word: str = "me"  # "me" or "my"
    span: Span = _span()


@dataclass(frozen=True)
class MyWorld:
    span: Span = _span()


@dataclass(frozen=True)
class WorldCall:
    name: object
    span: Span = _span()


@dataclass(frozen=True)
class Var:
    name: str
    span: Span = _span()


@dataclass(frozen=True)
class Param:
    name: str
    span: Span = _span()


@dataclass(frozen=True)
class Attr:
    obj: object
    name: str
    span: Span = _span()


@dataclass(frozen=True)
class Index:
    obj: object
    key: object
    span: Span = _span()


@dataclass(frozen=True)
class Unary:
    op: str
    operand: object
    span: Span = _span()


@dataclass(frozen=True)
class Binary:
    op: str
    left: object
    right: object
    span: Span = _span()


@dataclass(frozen=True)
class Range:
    low: object
    high: object
    span: Span = _span()


@dataclass(frozen=True)
class Call:
    func: str
    args: Tuple = ()
    span: Span = _span()


###################
# Update expressions
###################
@dataclass(frozen=True)
class CoreExpr:
    """
    One core update. `target` is the path written; `value` is the second
    operand where the update has one (the data value, the transition, the
    transition name, the world copied from or the copy destination); `keys`
    is the copy_properties key list, None meaning all.
    """

    kind: str
    target: object
    value: Optional[object] = None
    keys: Optional[Tuple] = None
    span: Span = _span()


@dataclass(frozen=True)
class MacroCall:
    name: str
    args: Tuple = ()
    span: Span = _span()


@dataclass(frozen=True)
class GuardExists:
    path: object
    span: Span = _span()


@dataclass(frozen=True)
class GuardMissing:
    path: object
    span: Span = _span()


@dataclass(frozen=True)
class GuardCompare:
    path: object
    op: str
    value: object
    span: Span = _span()


@dataclass(frozen=True)
class GuardedExpr:
    guard: object
    core: CoreExpr
    span: Span = _span()


############
# Statements
############
@dataclass(frozen=True)
class Wait:
    ticks: object
    span: Span = _span()


@dataclass(frozen=True)
class Let:
    name: str
    value: object
    span: Span = _span()


@dataclass(frozen=True)
class If:
    cond: object
    body: Tuple
    orelse: Optional[Tuple] = None
    span: Span = _span()


@dataclass(frozen=True)
class Case:
    value: object
    body: Tuple
    span: Span = _span()


@dataclass(frozen=True)
class Switch:
    subject: object
    cases: Tuple
    default: Optional[Tuple] = None
    span: Span = _span()


@dataclass(frozen=True)
class Select:
    binder: str
    source: object
    where: Optional[object]
    minimizing: Optional[object]
    body: Tuple
    orelse: Optional[Tuple] = None
    span: Span = _span()


@dataclass(frozen=True)
class Return:
    updates: Tuple
    stop: bool = False
    span: Span = _span()


@dataclass(frozen=True)
class Emit:
    updates: Tuple
    span: Span = _span()


@dataclass(frozen=True)
class Await:
    target: object
    span: Span = _span()


@dataclass(frozen=True)
class Program:
    body: Tuple = ()


CORE_KINDS = (
    "set_data",
    "delete_data",
    "set_transition",
    "delete_transition",
    "start_process",
    "cancel_process",
    "rebind_process",
    "create_entity",
    "delete_entity",
    "add_world",
    "delete_world",
    "copy_properties",
)

BUILTINS = ("abs", "distance", "contains", "randomValue", "exists", "len", "min", "max")

KEYWORDS = frozenset(
    [
        "wait",
        "let",
        "if",
        "else",
        "switch",
        "case",
        "default",
        "select",
        "in",
        "where",
        "minimizing",
        "return",
        "stop",
        "emit",
        "await",
        "when",
        "do",
        "missing",
        "from",
        "me",
        "my",
        "myworld",
        "world",
        "true",
        "false",
        "unit",
        "and",
        "or",
        "not",
    ]
    + list(CORE_KINDS)
)


def child_blocks(stmt):
    """Return the nested blocks of a statement, indexed the way the
    interpreter records resume positions."""
    if isinstance(stmt, If):
        return [stmt.body] + ([stmt.orelse] if stmt.orelse is not None else [])
    if isinstance(stmt, Switch):
        blocks = [case.body for case in stmt.cases]
        if stmt.default is not None:
            blocks.append(stmt.default)
        return blocks
    if isinstance(stmt, Select):
        return [stmt.body] + ([stmt.orelse] if stmt.orelse is not None else [])
    return []
