"""Two-process run mode: the detector lives in a child process and reports over UDP.

The simulation owns the world, so each detection tick it sends the child a
synthetic camera frame (ego pose and enemy position) on a side channel::

    FRM,<frame>,<t_ms>,<ego_n>,<ego_e>,<ego_d>,<heading>,<enemy_n>,<enemy_e>,<enemy_d>

The child runs the detector and the positioning step, sends any resulting
``DET`` datagram to the guidance server, then answers on the frame channel
with ``ACK,<frame>,<det_seq>`` (``-`` when nothing was detected). Waiting on
the ACK keeps both processes in lockstep, so a split run tracks the
in-process run up to the six-decimal rounding of the wire format.
"""
from __future__ import annotations

import argparse
import json
import logging
import socket
import subprocess
import sys
from typing import Optional

from ..cam_geometry import CameraModel, position_from_detection
from ..detection_sim import DetectorModel, relative_in_camera, synth_detection
from ..link import (DetectionClient, DetectionServer, Mailbox, datagram_from_estimate,
                    estimate_from_datagram)
from ..vehicle import VehicleState

log = logging.getLogger(__name__)

FRAME_TIMEOUT = 5.0


def _detector_json(model: DetectorModel, threshold: float) -> str:
    cam = model.camera
    return json.dumps({
        "camera": [cam.W_I, cam.H_I, cam.half_fov_x, cam.half_fov_y],
        "R_det": model.R_det, "p_near": model.p_near, "p_far": model.p_far,
        "quantize_px": model.quantize_px, "z_split": model.z_split,
        "rng_seed": model.rng_seed, "threshold": threshold,
    })


def _detector_from_json(text: str) -> tuple[DetectorModel, float]:
    d = json.loads(text)
    model = DetectorModel(CameraModel(*d["camera"]), d["R_det"], d["p_near"], d["p_far"],
                          d["quantize_px"], d["z_split"], d["rng_seed"])
    return model, d["threshold"]


class SplitDetector:
    """Guidance-side handle on a detector child process."""

    def __init__(self, model: DetectorModel, threshold: float, det_port: int = 0):
        self.camera = model.camera
        self.mailbox = Mailbox()
        self.server = DetectionServer(self.mailbox, det_port)
        self._frames = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        self._frames.bind(("127.0.0.1", 0))
        self._frames.settimeout(FRAME_TIMEOUT)
        self._frame_seq = 0
        self._peer = None
        self._config = _detector_json(model, threshold)
        self._proc: Optional[subprocess.Popen] = None

    def __enter__(self):
        self.server.start()
        host, port = self._frames.getsockname()
        self._proc = subprocess.Popen(
            [sys.executable, "-m", "stadia.simctl.split",
             "--det-port", str(self.server.port), "--frame-addr", f"{host}:{port}",
             "--config", self._config])
        data, self._peer = self._frames.recvfrom(64)
        if data != b"RDY":
            raise RuntimeError(f"detector process sent {data!r} instead of RDY")
        return self

    def __exit__(self, *exc):
        try:
            if self._peer is not None:
                self._frames.sendto(b"BYE", self._peer)
            if self._proc is not None:
                self._proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            self._proc.kill()
        finally:
            self._frames.close()
            self.server.stop()

    def detect(self, t, ego, enemy):
        self._frame_seq += 1
        vals = (*ego.position, ego.heading, *enemy)
        msg = f"FRM,{self._frame_seq},{round(t * 1000)}," + ",".join(repr(v) for v in vals)
        self._frames.sendto(msg.encode(), self._peer)
        while True:
            try:
                data, _ = self._frames.recvfrom(64)
            except socket.timeout:
                log.warning("frame %d: no ACK from detector", self._frame_seq)
                return None
            parts = data.decode(errors="replace").split(",")
            if len(parts) == 3 and parts[0] == "ACK" and parts[1] == str(self._frame_seq):
                break
        if parts[2] == "-":
            return None
        seq = int(parts[2])
        if not self.mailbox.wait_for_seq(seq, FRAME_TIMEOUT):
            log.warning("frame %d: DET %d never reached the server", self._frame_seq, seq)
            return None
        d = self.mailbox.take()
        if d is None:
            return None
        return d.seq, estimate_from_datagram(d, self.camera)


def detector_main(det_port: int, frame_addr: str, config: str) -> None:
    model, threshold = _detector_from_json(config)
    host, port = frame_addr.rsplit(":", 1)
    peer = (host, int(port))
    frames = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
    client = DetectionClient(det_port)
    frames.sendto(b"RDY", peer)
    seq = 0
    try:
        while True:
            data, _ = frames.recvfrom(1024)
            if data == b"BYE":
                return
            parts = data.decode().split(",")
            if parts[0] != "FRM" or len(parts) != 10:
                continue
            frame, t_ms = parts[1], int(parts[2])
            n, e, d, heading, en, ee, ed = (float(p) for p in parts[3:])
            ego = VehicleState((n, e, d), (0.0, 0.0, 0.0), heading)
            hit = synth_detection(relative_in_camera(ego, (en, ee, ed)), model)
            est = None
            if hit is not None:
                est = position_from_detection(hit[0], model.camera, hit[1], threshold)
            if est is None:
                frames.sendto(f"ACK,{frame},-".encode(), peer)
                continue
            seq += 1
            client.send(datagram_from_estimate(est, seq, t_ms))
            frames.sendto(f"ACK,{frame},{seq}".encode(), peer)
    finally:
        client.close()
        frames.close()


def main(argv=None) -> None:
    p = argparse.ArgumentParser(description="synthetic detector process (UDP client)")
    p.add_argument("--det-port", type=int, required=True)
    p.add_argument("--frame-addr", required=True)
    p.add_argument("--config", required=True)
    args = p.parse_args(argv)
    detector_main(args.det_port, args.frame_addr, args.config)


if __name__ == "__main__":
    main()
