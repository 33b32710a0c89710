"""
Trace events and the sinks that receive them.

A trace file holds one JSON object per line:

    {"kind":"update_committed","payload":{"update":"set_data w.c.n = 1"},
     "seq":3,"subject":"w.c.p","tick":12}

Events of one tick are handed to the sinks together when the tick closes,
ordered by `seq`.
"""
import json
from collections import Counter
from dataclasses import dataclass

TICK_OPEN = "tick_open"
SEGMENT_RUN = "segment_run"
PROCESS_SUSPENDED = "process_suspended"
PROCESS_AWAITING = "process_awaiting"
PROCESS_FINISHED = "process_finished"
PROCESS_CANCELLED = "process_cancelled"
PROCESS_RESPAWNED = "process_respawned"
PROCESS_STARTED = "process_started"
UPDATE_COMMITTED = "update_committed"
UPDATE_DROPPED = "update_dropped"
SEMANTICS_FAILURE = "semantics_failure"
TICK_CLOSE = "tick_close"

KINDS = (
    TICK_OPEN,
    SEGMENT_RUN,
    PROCESS_SUSPENDED,
    PROCESS_AWAITING,
    PROCESS_FINISHED,
    PROCESS_CANCELLED,
    PROCESS_RESPAWNED,
    PROCESS_STARTED,
    UPDATE_COMMITTED,
    UPDATE_DROPPED,
    SEMANTICS_FAILURE,
    TICK_CLOSE,
)


@dataclass(frozen=True)
class TraceEvent:
    tick: int
    seq: int
    kind: str
    subject: str = ""
    payload: object = None

    def to_json(self):
        return json.dumps(
            {
                "tick": self.tick,
                "seq": self.seq,
                "kind": self.kind,
                "subject": self.subject,
                "payload": self.payload,
            },
            sort_keys=True,
            separators=(",", ":"),
            ensure_ascii=False,
        )

    @classmethod
    def from_json(cls, line):
        data = json.loads(line)
        return cls(data["tick"], data["seq"], data["kind"], data.get("subject", ""), data.get("payload"))


class TraceSink(object):
    def write(self, events):
        raise NotImplementedError

    def close(self):
        pass


class FileTraceSink(TraceSink):
    """Appends events to a .trace file (or any writable text stream)."""

    def __init__(self, target):
        if hasattr(target, "write"):
            self.stream = target
            self._owned = False
        else:
            self.stream = open(target, "w", encoding="utf-8")
            self._owned = True

    def write(self, events):
        for event in events:
            self.stream.write(event.to_json())
            self.stream.write("\n")

    def close(self):
        self.stream.flush()
        if self._owned:
            self.stream.close()


class MemoryTraceSink(TraceSink):
    def __init__(self):
        self.events = []

    def write(self, events):
        self.events.extend(events)

    def of_kind(self, *kinds):
        return [event for event in self.events if event.kind in kinds]


class CountingSink(TraceSink):
    def __init__(self):
        self.counts = Counter()

    def write(self, events):
        self.counts.update(event.kind for event in events)


def read_trace(path):
    with open(path, encoding="utf-8") as f:
        return [TraceEvent.from_json(line) for line in f if line.strip()]
