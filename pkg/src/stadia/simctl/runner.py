"""Fixed-step closed loop: detector -> guidance -> vehicle, against a kinematic enemy."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Protocol, Sequence

import numpy as np

from ..cam_geometry import TargetEstimate, position_from_detection
from ..detection_sim import DetectorModel, relative_in_camera, synth_detection
from ..guidance import FlightMode, GuidanceConfig, Mode, VelocitySetpointNED, guidance_step
from ..vehicle import VehicleState, heading_from_velocity, step_dynamics, waypoint_velocity
from .report import LogRow, RunReport, build_report
from .scenario import EnemyLeg, Scenario

_T_EPS = 1e-9


class EnemyTrack:
    """Piecewise-linear, constant-speed motion through the scenario's enemy path."""

    def __init__(self, path: Sequence[EnemyLeg]):
        self._points = [np.asarray(path[0].position_m, dtype=float)]
        self._times = [0.0]
        for leg in path[1:]:
            p = np.asarray(leg.position_m, dtype=float)
            dist = float(np.linalg.norm(p - self._points[-1]))
            if dist == 0:
                continue
            if leg.speed_mps <= 0:
                break  # a zero-speed leg is never reached
            self._times.append(self._times[-1] + dist / leg.speed_mps)
            self._points.append(p)

    def position(self, t: float) -> tuple[float, float, float]:
        times, pts = self._times, self._points
        if t <= 0 or len(pts) == 1:
            p = pts[0]
        elif t >= times[-1]:
            p = pts[-1]
        else:
            i = int(np.searchsorted(times, t, side="right")) - 1
            frac = (t - times[i]) / (times[i + 1] - times[i])
            p = pts[i] + frac * (pts[i + 1] - pts[i])
        return (float(p[0]), float(p[1]), float(p[2]))


class DetectionSource(Protocol):
    def detect(self, t: float, ego: VehicleState,
               enemy: tuple[float, float, float]) -> Optional[tuple[int, TargetEstimate]]:
        ...


class InProcessDetector:
    """Synthetic detector plus positioning, run in the simulation thread."""

    def __init__(self, model: DetectorModel, threshold: float):
        self.model = model
        self.threshold = threshold
        self.seq = 0

    def detect(self, t, ego, enemy):
        rel = relative_in_camera(ego, enemy)
        hit = synth_detection(rel, self.model)
        if hit is None:
            return None
        box, prob = hit
        est = position_from_detection(box, self.model.camera, prob, self.threshold)
        if est is None:
            return None
        self.seq += 1
        return self.seq, est


@dataclass
class RunResult:
    rows: list[LogRow]
    report: RunReport
    mission_index: int


def run_scenario(s: Scenario, seed: Optional[int] = None,
                 detector: Optional[DetectionSource] = None) -> RunResult:
    """Simulate ``s`` and return the per-step log and its summary.

    Guidance runs every step so the Offboard timeout is checked at full rate;
    the detector only fires every ``T_D``. In Offboard the vehicle holds the
    last setpoint it was sent; in Guided it flies the mission and turns to
    face its direction of travel.
    """
    if seed is not None and seed != s.seed:
        s = s.model_copy(update={"seed": seed})
    cfg: GuidanceConfig = s.guidance_config()
    if detector is None:
        detector = InProcessDetector(s.detector_model(), cfg.threshold)
    enemy = EnemyTrack(s.enemy.path)
    mission = s.mission_model()
    state = s.initial_state()
    mode = Mode()
    held: Optional[VelocitySetpointNED] = None
    wp_index = 0
    next_det = 0.0
    dt, tau = s.dt_s, s.ego.tau_s
    n_steps = int(round(s.duration_s / dt))

    rows: list[LogRow] = []
    for k in range(n_steps):
        t = k * dt
        enemy_pos = enemy.position(t)
        hit = None
        if t + _T_EPS >= next_det:
            next_det = t + cfg.T_D
            hit = detector.detect(t, state, enemy_pos)
        est = hit[1] if hit else None

        if s.guidance.enabled:
            res = guidance_step(est, state.heading, t, mode, cfg)
            mode = res.mode
            if res.setpoint is not None:
                held = res.setpoint

        if mode.mode is FlightMode.OFFBOARD:
            cmd, heading_cmd = held, None
        else:
            cmd, wp_index = waypoint_velocity(state, mission, wp_index)
            heading_cmd = heading_from_velocity(cmd)

        rows.append(LogRow(
            t=t, ego=state.position, heading=state.heading, enemy=enemy_pos,
            mode=mode.mode.value, det_seq=hit[0] if hit else None,
            est=(est.x_D, est.y_D, est.z_D, est.probability) if est else None,
            cmd=cmd.as_tuple()))
        state = step_dynamics(state, cmd, dt, tau, heading_cmd)

    report = build_report(rows, dt, s.camera_model(), cfg.deadband,
                          s.capture.radius_m, s.capture.hold_s,
                          mission_complete=wp_index >= len(mission.waypoints))
    return RunResult(rows, report, wp_index)


def separation(row: LogRow) -> float:
    return math.dist(row.ego, row.enemy)


def execute(s: Scenario, seed: Optional[int] = None, mode: Optional[str] = None,
            det_port: int = 0) -> RunResult:
    """Run ``s`` in the requested mode (defaults to the scenario's own ``run_mode``)."""
    mode = mode or s.run_mode
    if mode == "inproc":
        return run_scenario(s, seed)
    if mode != "split":
        raise ValueError(f"unknown run mode {mode!r}")
    from .split import SplitDetector

    if seed is not None:
        s = s.model_copy(update={"seed": seed})
    with SplitDetector(s.detector_model(), s.guidance.threshold, det_port) as det:
        return run_scenario(s, detector=det)
