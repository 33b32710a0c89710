"""
The value vocabulary shared by entity data, snapshots, update text and TDL.

    Unit      -> None
    Bool      -> bool
    Int       -> int (64-bit signed range enforced)
    Float     -> float
    Text      -> str
    Coord     -> Coord(x, y)
    List      -> tuple of values
    EntityRef -> EntityRef(name)
    WorldRef  -> WorldRef(name)

All values are immutable, so configurations can share them freely.
"""
import json
import math
from dataclasses import dataclass

from .utils import render_name

INT_MIN = -(2**63)
INT_MAX = 2**63 - 1


@dataclass(frozen=True)
class Coord:
    x: int
    y: int

    def __add__(self, other):
        return Coord(self.x + other.x, self.y + other.y)

    def __sub__(self, other):
        return Coord(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class EntityRef:
    name: str


@dataclass(frozen=True)
class WorldRef:
    name: str


def is_value(value):
    if value is None or isinstance(value, (bool, str, float)):
        return True
    if isinstance(value, int):
        return INT_MIN <= value <= INT_MAX
    if isinstance(value, Coord):
        return type(value.x) is int and type(value.y) is int
    if isinstance(value, (EntityRef, WorldRef)):
        return isinstance(value.name, str)
    if isinstance(value, tuple):
        return all(is_value(item) for item in value)
    return False


def type_name(value):
    if value is None:
        return "Unit"
    if isinstance(value, bool):
        return "Bool"
    if isinstance(value, int):
        return "Int"
    if isinstance(value, float):
        return "Float"
    if isinstance(value, str):
        return "Text"
    if isinstance(value, Coord):
        return "Coord"
    if isinstance(value, EntityRef):
        return "EntityRef"
    if isinstance(value, WorldRef):
        return "WorldRef"
    if isinstance(value, tuple):
        return "List"
    return type(value).__name__


def values_equal(a, b):
    # bool is an int subclass; True must not equal 1
    if isinstance(a, bool) or isinstance(b, bool):
        return isinstance(a, bool) and isinstance(b, bool) and a == b
    if type_name(a) != type_name(b):
        if isinstance(a, (int, float)) and isinstance(b, (int, float)):
            return a == b
        return False
    if isinstance(a, tuple):
        return len(a) == len(b) and all(values_equal(x, y) for x, y in zip(a, b))
    return a == b


def render_float(value):
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return repr(value)


def render_value(value):
    """Canonical text of a value, as used by inspect, traces and update text."""
    if value is None:
        return "unit"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return render_float(value)
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, Coord):
        return "(%d,%d)" % (value.x, value.y)
    if isinstance(value, EntityRef):
        return "ref(%s)" % render_name(value.name)
    if isinstance(value, WorldRef):
        return "wref(%s)" % render_name(value.name)
    if isinstance(value, tuple):
        return "[%s]" % ",".join(render_value(item) for item in value)
    raise TypeError("%r is not a value" % (value,))


def encode_value(value):
    """Value -> JSON-compatible structure for scenario and snapshot documents."""
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    if isinstance(value, Coord):
        return {"coord": [value.x, value.y]}
    if isinstance(value, EntityRef):
        return {"entity": value.name}
    if isinstance(value, WorldRef):
        return {"world": value.name}
    if isinstance(value, tuple):
        return [encode_value(item) for item in value]
    raise TypeError("%r is not a value" % (value,))


def decode_value(data):
    """Inverse of `encode_value`. Raises ValueError on anything else."""
    if data is None or isinstance(data, (bool, str, float)):
        return data
    if isinstance(data, int):
        if not INT_MIN <= data <= INT_MAX:
            raise ValueError("Integer %d is outside the 64-bit range" % data)
        return data
    if isinstance(data, list):
        return tuple(decode_value(item) for item in data)
    if isinstance(data, dict) and len(data) == 1:
        (tag, payload), = data.items()
        if tag == "coord":
            if (
                isinstance(payload, list)
                and len(payload) == 2
                and all(type(n) is int for n in payload)
            ):
                return Coord(payload[0], payload[1])
            raise ValueError("A coord needs two integers; got %r" % (payload,))
        if tag == "entity" and isinstance(payload, str):
            return EntityRef(payload)
        if tag == "world" and isinstance(payload, str):
            return WorldRef(payload)
    raise ValueError("%r is not an encoded value" % (data,))
