"""Velocity-setpoint guidance for avoiding or netting a detected UAV.

Two manoeuvres are produced from a camera-frame target estimate: an
avoidance setpoint that pushes away from the target when the vehicle has no
net, and a tracking setpoint that steers toward it when it does. Tracking
respects a central dead-band of the image in which no lateral correction is
commanded.

``guidance_step`` arbitrates between the mission (Guided) and the
companion-computer setpoints (Offboard).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Literal, Optional

from .cam_geometry import NormalizedCentre, TargetEstimate
from .errors import InvalidInput


@dataclass(frozen=True)
class BodyTarget:
    x_b: float  # forward
    y_b: float  # rightward
    z_b: float  # vertical, same sign as y_D


@dataclass(frozen=True)
class VelocitySetpointNED:
    n: float
    e: float
    d: float

    @property
    def norm(self) -> float:
        return math.sqrt(self.n * self.n + self.e * self.e + self.d * self.d)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.n, self.e, self.d)


ZERO_SETPOINT = VelocitySetpointNED(0.0, 0.0, 0.0)


@dataclass(frozen=True)
class GuidanceConfig:
    k1: float = 1.0
    k2: float = 0.5
    k_net: float = 0.5
    deadband: float = 0.4
    has_net: bool = False
    threshold: float = 0.7
    T_D: float = 0.5
    t_R: float = 0.5
    v_cap: float = 3.0
    rotation: Literal["verbatim", "standard"] = "verbatim"
    d_sign: float = 1.0
    # forward closure while the target sits in the horizontal dead-band; 0 keeps the
    # printed law, under which a centred target is never approached
    approach_gain: float = 0.0

    def __post_init__(self):
        if not (self.k1 > 0 and self.k2 > 0 and self.k_net > 0):
            raise InvalidInput("gains must be positive")
        if not 0 < self.deadband < 1:
            raise InvalidInput(f"deadband must lie in (0, 1), got {self.deadband}")
        if not (self.T_D > 0 and self.t_R > 0):
            raise InvalidInput("T_D and t_R must be positive")
        if not self.v_cap > 0:
            raise InvalidInput("v_cap must be positive")
        if self.rotation not in ("verbatim", "standard"):
            raise InvalidInput(f"unknown rotation {self.rotation!r}")
        if self.d_sign not in (1.0, -1.0):
            raise InvalidInput("d_sign must be +1 or -1")
        if self.approach_gain < 0:
            raise InvalidInput("approach_gain must be non-negative")

    @property
    def S_x(self) -> tuple[float, float]:
        return (-self.deadband, self.deadband)

    @property
    def S_y(self) -> tuple[float, float]:
        return (-self.deadband, self.deadband)


class FlightMode(str, enum.Enum):
    GUIDED = "Guided"
    OFFBOARD = "Offboard"


@dataclass(frozen=True)
class Mode:
    mode: FlightMode = FlightMode.GUIDED
    offboard_since: Optional[float] = None
    last_command: Optional[float] = None
    last_step: Optional[float] = None


def body_from_estimate(est: TargetEstimate) -> BodyTarget:
    return BodyTarget(est.z_D, est.x_D, est.y_D)


def clamp(sp: VelocitySetpointNED, v_cap: float) -> VelocitySetpointNED:
    mag = sp.norm
    if mag <= v_cap:
        return sp
    s = v_cap / mag
    return VelocitySetpointNED(sp.n * s, sp.e * s, sp.d * s)


def _horizontal(body: BodyTarget, heading_deg: float, cfg: GuidanceConfig,
                sign: float) -> tuple[float, float]:
    # sign=+1 is the avoidance sense, -1 the tracking sense
    phi = heading_deg * math.pi / 180
    if cfg.rotation == "verbatim":
        return (sign * cfg.k1 * math.sin(phi) * body.x_b,
                -sign * cfg.k1 * math.cos(phi) * body.y_b)
    n = math.cos(phi) * body.x_b - math.sin(phi) * body.y_b
    e = math.sin(phi) * body.x_b + math.cos(phi) * body.y_b
    return (-sign * cfg.k1 * n, -sign * cfg.k1 * e)


def avoidance_setpoint(body: BodyTarget, heading_deg: float,
                       cfg: GuidanceConfig) -> VelocitySetpointNED:
    n, e = _horizontal(body, heading_deg, cfg, +1.0)
    return clamp(VelocitySetpointNED(n, e, cfg.d_sign * cfg.k2 * body.z_b), cfg.v_cap)


def tracking_setpoint(body: BodyTarget, centre: NormalizedCentre, heading_deg: float,
                      cfg: GuidanceConfig) -> VelocitySetpointNED:
    """Steer toward the target, holding still laterally while it sits in the dead-band.

    A centre component inside ``[-deadband, deadband]`` counts as in band.
    Horizontally in band: only the vertical channel is driven. Horizontally
    out of band: lateral correction, plus the vertical channel only when the
    vertical component is out of band as well.
    """
    out_x = abs(centre.x_prime) > cfg.deadband
    out_y = abs(centre.y_prime) > cfg.deadband
    d = cfg.d_sign * cfg.k_net * body.z_b
    if not out_x:
        if cfg.approach_gain == 0:
            return clamp(VelocitySetpointNED(0.0, 0.0, d), cfg.v_cap)
        phi = heading_deg * math.pi / 180
        fwd = cfg.approach_gain * body.x_b
        return clamp(VelocitySetpointNED(fwd * math.cos(phi), fwd * math.sin(phi), d), cfg.v_cap)
    n, e = _horizontal(body, heading_deg, cfg, -1.0)
    return clamp(VelocitySetpointNED(n, e, d if out_y else 0.0), cfg.v_cap)


def manoeuvre_setpoint(est: TargetEstimate, heading_deg: float,
                       cfg: GuidanceConfig) -> VelocitySetpointNED:
    body = body_from_estimate(est)
    if cfg.has_net:
        return tracking_setpoint(body, est.centre, heading_deg, cfg)
    return avoidance_setpoint(body, heading_deg, cfg)


@dataclass(frozen=True)
class StepResult:
    mode: Mode
    setpoints: tuple[VelocitySetpointNED, ...]
    zero_setpoint_emitted: bool

    @property
    def setpoint(self) -> Optional[VelocitySetpointNED]:
        """The last setpoint issued this step, the one the vehicle ends up holding."""
        return self.setpoints[-1] if self.setpoints else None


def guidance_step(detection: Optional[TargetEstimate], heading_deg: float, now: float,
                  state: Mode, cfg: GuidanceConfig) -> StepResult:
    """Advance the Guided/Offboard machine by one tick.

    Entering Offboard issues a zero setpoint ahead of the manoeuvre, the way
    a flight stack needs a setpoint streamed before it accepts the mode. With
    no fresh detection for longer than ``t_R`` the machine drops back to
    Guided and the mission resumes.
    """
    if state.last_step is not None and now < state.last_step:
        raise InvalidInput(f"clock went backwards: {now} < {state.last_step}")
    if detection is not None and detection.probability < cfg.threshold:
        detection = None

    if detection is not None:
        sp = manoeuvre_setpoint(detection, heading_deg, cfg)
        if state.mode is FlightMode.GUIDED:
            new = Mode(FlightMode.OFFBOARD, offboard_since=now, last_command=now, last_step=now)
            return StepResult(new, (ZERO_SETPOINT, sp), True)
        return StepResult(replace(state, last_command=now, last_step=now), (sp,), False)

    if (state.mode is FlightMode.OFFBOARD and state.last_command is not None
            and now - state.last_command > cfg.t_R):
        return StepResult(Mode(FlightMode.GUIDED, last_step=now), (), False)
    return StepResult(replace(state, last_step=now), (), False)
