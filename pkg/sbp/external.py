"""
The external driver protocol: JSON lines over a byte stream.

Every request the engine sends is one line holding a JSON object

    {"id": 7, "tick": 12, "world": "map", "entity": "player",
     "process": "walk", "iteration": 0, "view": {"map.player.loc": {...}}}

and the driver answers with one line per request, in any order, carrying
the same id:

    {"id": 7, "updates": ["set_data map.player.loc = (3,0)"],
     "cont": true, "wait": 0}

or `{"id": 7, "pending": true}` when it has no answer yet. Updates use the
canonical update text. Several requests may be in flight on one channel;
responses are matched by id.

A run with a wall-clock limit hands its deadline to the channels, so a
driver that stops answering ends the run with WallclockExceeded instead of
blocking it.
"""
import collections
import itertools
import json
import logging
import queue
import socket
import sys
import threading
import time

from .exceptions import ProtocolError, WallclockExceeded

logger = logging.getLogger(__name__)


def encode_record(record):
    return json.dumps(record, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def decode_record(line):
    try:
        record = json.loads(line)
    except ValueError as e:
        raise ProtocolError("Malformed record %r: %s" % (line.strip()[:80], e))
    if not isinstance(record, dict):
        raise ProtocolError("Records must be JSON objects; got %r" % (record,))
    return record


def check_response(record):
    """Raise ProtocolError unless `record` is a well-formed response."""
    if type(record.get("id")) is not int:
        raise ProtocolError("Response without an integer id: %s" % encode_record(record))
    if record.get("pending") is True:
        return record
    updates = record.get("updates", [])
    if not isinstance(updates, list) or not all(isinstance(text, str) for text in updates):
        raise ProtocolError("'updates' must be a list of update texts")
    if not isinstance(record.get("cont", True), bool):
        raise ProtocolError("'cont' must be true or false")
    wait = record.get("wait", 0)
    if type(wait) is not int or wait < 0:
        raise ProtocolError("'wait' must be a non-negative integer")
    return record


class Channel(object):
    """
    Base class of driver channels. Subclasses provide `send_line` and
    `read_line`; `exchange` is safe to call from several threads.

    `watchdog` is None or (started, seconds): the monotonic start of the run
    and its wall-clock limit.
    """

    def __init__(self):
        self._ids = itertools.count(1)
        self._id_lock = threading.Lock()
        self._write_lock = threading.Lock()
        self._read_lock = threading.Lock()
        self._responses = {}
        self.watchdog = None

    def next_id(self):
        with self._id_lock:
            return next(self._ids)

    def seconds_left(self):
        if self.watchdog is None:
            return None
        started, seconds = self.watchdog
        return max(0.0, started + seconds - time.monotonic())

    def exchange(self, request):
        """Send `request` (without an id) and return the matching response."""
        request = dict(request, id=self.next_id())
        with self._write_lock:
            self.send_line(encode_record(request))
        while True:
            with self._read_lock:
                if request["id"] in self._responses:
                    return self._responses.pop(request["id"])
                line = self.read_line(self.seconds_left())
                if line is None:
                    started, _ = self.watchdog
                    logger.warning("Driver did not answer request %d before the deadline", request["id"])
                    raise WallclockExceeded(request.get("tick", 0), time.monotonic() - started)
                if not line:
                    raise ProtocolError(
                        "Driver closed the channel with request %d pending" % request["id"]
                    )
                if not line.strip():
                    continue
                response = check_response(decode_record(line))
                self._responses[response["id"]] = response

    def send_line(self, line):
        raise NotImplementedError

    def read_line(self, timeout=None):
        """
        Return the next line, "" once the driver closed the channel or None
        when `timeout` seconds pass without one.
        """
        raise NotImplementedError

    def close(self):
        pass


class StreamChannel(Channel):
    """
    Talks to a driver through a pair of text streams. A daemon thread reads
    `reader` so that waiting for a line can time out.
    """

    def __init__(self, reader, writer):
        super(StreamChannel, self).__init__()
        self.reader = reader
        self.writer = writer
        self._lines = queue.Queue()
        self._pump = None
        self._closed = False

    def send_line(self, line):
        try:
            self.writer.write(line + "\n")
            self.writer.flush()
        except (OSError, ValueError) as e:
            raise ProtocolError("Cannot write to the driver: %s" % e)

    def _pump_lines(self):
        try:
            for line in iter(self.reader.readline, ""):
                self._lines.put(line)
        except (OSError, ValueError) as e:
            self._lines.put(e)
        self._lines.put("")

    def read_line(self, timeout=None):
        if self._closed:
            return ""
        if self._pump is None:
            self._pump = threading.Thread(target=self._pump_lines, name="sbp-driver-reader", daemon=True)
            self._pump.start()
        try:
            line = self._lines.get(timeout=timeout)
        except queue.Empty:
            return None
        if isinstance(line, Exception):
            self._closed = True
            raise ProtocolError("Cannot read from the driver: %s" % line)
        if not line:
            self._closed = True
        return line


class TcpChannel(StreamChannel):
    def __init__(self, host, port, timeout=None):
        try:
            self.socket = socket.create_connection((host, port), timeout=timeout)
        except OSError as e:
            raise ProtocolError("Cannot connect to driver at %s:%d: %s" % (host, port, e))
        stream = self.socket.makefile("rw", encoding="utf-8", newline="\n")
        super(TcpChannel, self).__init__(stream, stream)

    def close(self):
        try:
            self.socket.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        self.reader.close()
        self.socket.close()


class ScriptChannel(Channel):
    """
    An in-process driver: `script(request) -> response` is called for every
    request. Records still go through the codec, so a script sees exactly
    what a remote driver would.
    """

    def __init__(self, script):
        super(ScriptChannel, self).__init__()
        self.script = script
        self._lines = collections.deque()

    def send_line(self, line):
        request = decode_record(line)
        response = self.script(request)
        if not isinstance(response, dict):
            raise ProtocolError("Script %r answered %r" % (self.script, response))
        self._lines.append(encode_record(dict(response, id=request["id"])))

    def read_line(self, timeout=None):
        return self._lines.popleft() if self._lines else ""


def parse_channel_spec(spec):
    """
    Split "stdio", "tcp:HOST:PORT" or "script:NAME" into (kind, argument).
    Raises ValueError.
    """
    if spec == "stdio":
        return "stdio", None
    kind, _, rest = spec.partition(":")
    if kind == "tcp":
        host, _, port = rest.rpartition(":")
        if not host or not port.isdigit():
            raise ValueError("Expected tcp:HOST:PORT, got %r" % spec)
        return "tcp", (host, int(port))
    if kind == "script" and rest:
        return "script", rest
    raise ValueError("Unknown channel %r; use stdio, tcp:HOST:PORT or script:NAME" % spec)


def open_channel(spec, scripts=None):
    """Open the channel `spec` names; `scripts` maps names to script drivers."""
    kind, argument = parse_channel_spec(spec)
    if kind == "stdio":
        return StreamChannel(sys.stdin, sys.stdout)
    if kind == "tcp":
        host, port = argument
        logger.info("Connecting to driver at %s:%d", host, port)
        return TcpChannel(host, port)
    if scripts is None or argument not in scripts:
        raise ProtocolError("No script driver named %r" % argument)
    return ScriptChannel(scripts[argument])
