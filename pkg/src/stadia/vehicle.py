"""Point-mass multirotor surrogate and a waypoint follower for Guided mode."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidInput
from .guidance import VelocitySetpointNED, ZERO_SETPOINT

HEADING_MIN_SPEED = 0.1


@dataclass(frozen=True)
class VehicleState:
    position: tuple[float, float, float]  # NED [m]
    velocity: tuple[float, float, float]  # NED [m/s]
    heading: float = 0.0  # degrees, 0 = north, clockwise positive

    def __post_init__(self):
        vals = (*self.position, *self.velocity, self.heading)
        if not all(math.isfinite(v) for v in vals):
            raise InvalidInput(f"non-finite vehicle state {vals}")
        object.__setattr__(self, "position", tuple(float(v) for v in self.position))
        object.__setattr__(self, "velocity", tuple(float(v) for v in self.velocity))
        object.__setattr__(self, "heading", float(self.heading) % 360.0)


@dataclass(frozen=True)
class Mission:
    waypoints: tuple[tuple[float, float, float], ...]
    acceptance_radius: float = 1.0
    cruise_speed: float = 1.0

    def __post_init__(self):
        if len(self.waypoints) == 0:
            raise InvalidInput("mission needs at least one waypoint")
        if not self.acceptance_radius > 0:
            raise InvalidInput("acceptance radius must be positive")
        if not self.cruise_speed > 0:
            raise InvalidInput("cruise speed must be positive")
        object.__setattr__(self, "waypoints",
                           tuple(tuple(float(c) for c in wp) for wp in self.waypoints))


def heading_from_velocity(v: VelocitySetpointNED) -> Optional[float]:
    """Heading (deg) pointing along the horizontal part of ``v``; None below 0.1 m/s."""
    if math.hypot(v.n, v.e) <= HEADING_MIN_SPEED:
        return None
    return math.degrees(math.atan2(v.e, v.n)) % 360.0


def step_dynamics(state: VehicleState, v_cmd: VelocitySetpointNED, dt: float, tau: float,
                  heading_cmd: Optional[float] = None) -> VehicleState:
    """First-order velocity tracking, integrated exactly over ``dt``.

    The velocity error shrinks by exp(-dt/tau) each step; position uses the
    trapezoid of the start and end velocities.
    """
    if not (dt > 0 and tau > 0):
        raise InvalidInput(f"dt and tau must be positive, got dt={dt} tau={tau}")
    decay = math.exp(-dt / tau)
    cmd = v_cmd.as_tuple()
    v1 = tuple(c + (v - c) * decay for v, c in zip(state.velocity, cmd))
    p1 = tuple(p + dt * (a + b) / 2 for p, a, b in zip(state.position, state.velocity, v1))
    heading = state.heading if heading_cmd is None else heading_cmd
    return VehicleState(p1, v1, heading)


def waypoint_velocity(state: VehicleState, mission: Mission,
                      index: int = 0) -> tuple[VelocitySetpointNED, int]:
    """Cruise toward the active waypoint, skipping any already within the acceptance radius.

    Returns the command and the (possibly advanced) waypoint index; the
    index equals ``len(mission.waypoints)`` once the mission is complete and
    the command is then zero.
    """
    pos = np.asarray(state.position)
    while index < len(mission.waypoints):
        delta = np.asarray(mission.waypoints[index]) - pos
        dist = float(np.linalg.norm(delta))
        if dist > mission.acceptance_radius:
            v = delta / dist * mission.cruise_speed
            return VelocitySetpointNED(float(v[0]), float(v[1]), float(v[2])), index
        index += 1
    return ZERO_SETPOINT, index


def distance_to(state: VehicleState, point: Sequence[float]) -> float:
    return math.dist(state.position, point)
