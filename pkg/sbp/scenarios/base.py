"""Small helpers the builders use to write scenario documents."""
from ..semantics import TDL
from ..values import encode_value


def tdl(source):
    return {"semantics": TDL, "source": source}


def entity(data=None, transitions=None, processes=None):
    return {
        "data": {key: encode_value(value) for key, value in (data or {}).items()},
        "transitions": dict(transitions or {}),
        "processes": dict(processes or {}),
    }


def document(worlds, macros=None, semantics=None, policy="LastWriterWins"):
    return {
        "version": 1,
        "policy": policy,
        "macros": dict(macros or {}),
        "semantics": dict(semantics or {}),
        "worlds": worlds,
    }


def macro(params, *expansion):
    return {"params": list(params), "expansion": list(expansion)}
