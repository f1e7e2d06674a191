"""UDP link between the detection process (client) and guidance (server).

Wire format, one datagram per detection, UTF-8, no trailing newline::

    DET,<seq>,<t_ms>,<class_id>,<prob>,<x_D>,<y_D>,<z_D>

The four real fields are printed with exactly six decimals. The receiving
side keeps only the newest detection: stale positions are worthless for
manoeuvring, so there is no queue.
"""
from __future__ import annotations

import logging
import math
import os
import re
import socket
import threading
from dataclasses import dataclass
from typing import Optional

from .cam_geometry import CameraModel, NormalizedCentre, TargetEstimate
from .errors import InvalidInput, MalformedDatagram

log = logging.getLogger(__name__)

DEFAULT_DET_PORT = 4560
PORT_ENV = "STADIA_DET_PORT"
MAX_DATAGRAM = 512
CLASS_UAV = 0

_UINT = re.compile(r"\d+", re.ASCII)
_REAL = re.compile(r"-?\d+(\.\d+)?([eE][-+]?\d+)?", re.ASCII)


@dataclass(frozen=True)
class DetectionDatagram:
    seq: int
    t_ms: int
    class_id: int
    prob: float
    x_D: float
    y_D: float
    z_D: float

    def __post_init__(self):
        for name in ("seq", "t_ms", "class_id"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < 0:
                raise InvalidInput(f"{name} must be a non-negative integer, got {v!r}")
        if not 0.0 <= self.prob <= 1.0:
            raise InvalidInput(f"prob must lie in [0, 1], got {self.prob}")
        for name in ("x_D", "y_D", "z_D"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidInput(f"{name} must be finite")


def default_port() -> int:
    return int(os.environ.get(PORT_ENV, DEFAULT_DET_PORT))


def encode_detection(d: DetectionDatagram) -> bytes:
    payload = (f"DET,{d.seq},{d.t_ms},{d.class_id},{d.prob:.6f},"
               f"{d.x_D:.6f},{d.y_D:.6f},{d.z_D:.6f}").encode("utf-8")
    if len(payload) > MAX_DATAGRAM:
        raise InvalidInput(f"encoded datagram is {len(payload)} bytes, limit {MAX_DATAGRAM}")
    return payload


def decode_detection(data: bytes) -> DetectionDatagram:
    if len(data) > MAX_DATAGRAM:
        raise MalformedDatagram(f"datagram of {len(data)} bytes exceeds {MAX_DATAGRAM}")
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise MalformedDatagram("payload is not UTF-8") from exc
    fields = text.split(",")
    if fields[0] != "DET":
        raise MalformedDatagram(f"unexpected tag {fields[0][:16]!r}")
    if len(fields) != 8:
        raise MalformedDatagram(f"expected 8 fields, got {len(fields)}")
    ints, reals = fields[1:4], fields[4:8]
    if not all(_UINT.fullmatch(f) for f in ints):
        raise MalformedDatagram("integer field is not an unsigned decimal")
    if not all(_REAL.fullmatch(f) for f in reals):
        raise MalformedDatagram("real field is not a decimal number")
    seq, t_ms, class_id = (int(f) for f in ints)
    prob, x, y, z = (float(f) for f in reals)
    if not all(math.isfinite(v) for v in (prob, x, y, z)):
        raise MalformedDatagram("real field overflows")
    if not 0.0 <= prob <= 1.0:
        raise MalformedDatagram(f"prob {prob} outside [0, 1]")
    return DetectionDatagram(seq, t_ms, class_id, prob, x, y, z)


def datagram_from_estimate(est: TargetEstimate, seq: int, t_ms: int) -> DetectionDatagram:
    return DetectionDatagram(seq, t_ms, CLASS_UAV, est.probability, est.x_D, est.y_D, est.z_D)


def estimate_from_datagram(d: DetectionDatagram, cam: CameraModel) -> TargetEstimate:
    """Rebuild the estimate on the guidance side.

    The wire carries only the metric position, so the normalized image
    centre is recovered by inverting the angular positioning. The size field
    is not transmitted and is set to NaN.
    """
    if d.z_D == 0:
        raise InvalidInput("cannot recover image centre from zero depth")
    x_p = math.atan(d.x_D / d.z_D) / (cam.half_fov_x * math.pi / 180)
    y_p = math.atan(d.y_D / d.z_D) / (cam.half_fov_y * math.pi / 180)
    return TargetEstimate(d.x_D, d.y_D, d.z_D, math.nan, NormalizedCentre(x_p, y_p), d.prob)


class Mailbox:
    """Holds the newest detection; older or repeated sequence numbers are dropped."""

    def __init__(self):
        self._lock = threading.Lock()
        self._cond = threading.Condition(self._lock)
        self._latest: Optional[DetectionDatagram] = None
        self._last_seq: Optional[int] = None
        self.dropped_stale = 0

    def put(self, d: DetectionDatagram) -> bool:
        with self._cond:
            if self._last_seq is not None and d.seq <= self._last_seq:
                self.dropped_stale += 1
                return False
            self._latest = d
            self._last_seq = d.seq
            self._cond.notify_all()
            return True

    def take(self) -> Optional[DetectionDatagram]:
        with self._lock:
            d, self._latest = self._latest, None
            return d

    def peek(self) -> Optional[DetectionDatagram]:
        with self._lock:
            return self._latest

    @property
    def last_seq(self) -> Optional[int]:
        with self._lock:
            return self._last_seq

    def wait_for_seq(self, seq: int, timeout: float) -> bool:
        """Block until a datagram with sequence >= ``seq`` has been accepted."""
        with self._cond:
            return self._cond.wait_for(
                lambda: self._last_seq is not None and self._last_seq >= seq, timeout)


class DetectionServer:
    """Threaded UDP intake feeding a :class:`Mailbox`.

    Malformed payloads are counted and logged, never raised.
    """

    def __init__(self, mailbox: Mailbox, port: int = DEFAULT_DET_PORT, host: str = "127.0.0.1"):
        self.mailbox = mailbox
        self.received = 0
        self.accepted = 0
        self.malformed = 0
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        try:
            self._sock.bind((host, port))
        except OSError:
            self._sock.close()
            raise
        self._sock.settimeout(0.05)
        self._stop = threading.Event()
        self._thread: Optional[threading.Thread] = None

    @property
    def address(self) -> tuple[str, int]:
        return self._sock.getsockname()

    @property
    def port(self) -> int:
        return self.address[1]

    def handle(self, data: bytes) -> None:
        self.received += 1
        try:
            d = decode_detection(data)
        except MalformedDatagram as exc:
            self.malformed += 1
            log.debug("dropping malformed datagram: %s", exc)
            return
        if self.mailbox.put(d):
            self.accepted += 1

    def _run(self) -> None:
        while not self._stop.is_set():
            try:
                data, _ = self._sock.recvfrom(65535)
            except socket.timeout:
                continue
            except OSError:
                if self._stop.is_set():
                    break
                log.exception("socket error in detection intake")
                continue
            try:
                self.handle(data)
            except Exception:  # intake must outlive any single payload
                log.exception("unexpected failure handling datagram")

    def start(self) -> "DetectionServer":
        self._thread = threading.Thread(target=self._run, name="det-intake", daemon=True)
        self._thread.start()
        return self

    @property
    def alive(self) -> bool:
        return self._thread is not None and self._thread.is_alive()

    def stop(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=2)
        self._sock.close()

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.stop()


def serve_detections(port: int, mailbox: Mailbox, host: str = "127.0.0.1") -> DetectionServer:
    """Bind ``port`` and start feeding ``mailbox`` in a background thread."""
    return DetectionServer(mailbox, port, host).start()


class DetectionClient:
    def __init__(self, port: int = DEFAULT_DET_PORT, host: str = "127.0.0.1"):
        self.target = (host, port)
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)

    def send(self, d: DetectionDatagram) -> None:
        self._sock.sendto(encode_detection(d), self.target)

    def send_raw(self, data: bytes) -> None:
        self._sock.sendto(data, self.target)

    def close(self) -> None:
        self._sock.close()
