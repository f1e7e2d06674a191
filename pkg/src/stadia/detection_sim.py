"""Synthetic stand-in for the onboard neural detector.

Projects the other UAV into the ego camera and produces the bounding box and
confidence a detector would report, sized so that the fitted depth law maps
the box back onto the true range.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .cam_geometry import BoundingBox, CameraModel
from .errors import InvalidInput
from .vehicle import VehicleState

Z_MAX = 7.2  # depth at which the first branch of the law reaches zero area
# keeps inverse sizes strictly inside the branch they are meant for
_BRANCH_EPS = 1e-12


@dataclass(frozen=True)
class DetectorModel:
    camera: CameraModel = field(default_factory=CameraModel)
    R_det: float = 12.0
    p_near: float = 0.95
    p_far: float = 0.70
    quantize_px: bool = True
    z_split: float = 2.2
    rng_seed: int = 0

    def __post_init__(self):
        if not 0 < self.p_far <= self.p_near <= 1:
            raise InvalidInput(f"need 0 < p_far <= p_near <= 1, got {self.p_far}, {self.p_near}")
        if not self.R_det > 0:
            raise InvalidInput("R_det must be positive")


@dataclass(frozen=True)
class RelativeTarget:
    x_D_true: float  # rightward
    y_D_true: float  # upward
    z_D_true: float  # forward

    @property
    def range(self) -> float:
        return math.sqrt(self.x_D_true ** 2 + self.y_D_true ** 2 + self.z_D_true ** 2)


def relative_in_camera(ego: VehicleState, enemy_position: Sequence[float]) -> RelativeTarget:
    dn, de, dd = (t - o for t, o in zip(enemy_position, ego.position))
    phi = math.radians(ego.heading)
    c, s = math.cos(phi), math.sin(phi)
    forward = c * dn + s * de
    right = -s * dn + c * de
    return RelativeTarget(right, -dd, forward)


def size_from_depth(z: float, model: DetectorModel) -> Optional[float]:
    """Area fraction a box must cover to be read back as depth ``z``.

    Returns None outside (0, 7.2) m, where the depth law has no preimage.
    """
    if not 0 < z < Z_MAX:
        return None
    if z >= model.z_split:
        return min((Z_MAX - z) / 120, 0.04 - _BRANCH_EPS)
    s = (2.2 - z) / 3.42
    return min(max(s, 0.04 + _BRANCH_EPS), 0.4)


def angular_centre(rel: RelativeTarget, cam: CameraModel) -> tuple[float, float]:
    """Normalized image centre of a target in front of the camera."""
    ax = math.degrees(math.atan(rel.x_D_true / rel.z_D_true))
    ay = math.degrees(math.atan(rel.y_D_true / rel.z_D_true))
    return ax / cam.half_fov_x, ay / cam.half_fov_y


def detection_probability(rng: float, model: DetectorModel) -> float:
    frac = min(max(rng / model.R_det, 0.0), 1.0)
    p = model.p_near + (model.p_far - model.p_near) * frac
    return min(max(p, model.p_far), model.p_near)


def _round_px(v: float) -> float:
    return float(math.floor(v + 0.5))


def _branch(size: float) -> int:
    return 0 if size <= 0.04 else (1 if size <= 0.4 else 2)


def _quantize(x0, x1, y0, y1, target: float, cam: CameraModel):
    """Snap edges to whole pixels without moving the area into another depth branch.

    Nearest rounding is used unless it crosses a branch boundary of the depth
    law; then the floor/ceil combination closest in area that stays in the
    intended branch is taken instead.
    """
    edges = tuple(_round_px(v) for v in (x0, x1, y0, y1))
    frame = cam.W_I * cam.H_I

    def area(e):
        return (e[1] - e[0]) * (e[3] - e[2]) / frame

    want = _branch(target)
    if edges[0] < edges[1] and edges[2] < edges[3] and _branch(area(edges)) == want:
        return edges
    best = None
    for e in itertools.product(*((math.floor(v), math.ceil(v)) for v in (x0, x1, y0, y1))):
        e = tuple(float(v) for v in e)
        if not (e[0] < e[1] and e[2] < e[3]) or e[0] < 0 or e[2] < 0 \
                or e[1] > cam.W_I or e[3] > cam.H_I or _branch(area(e)) != want:
            continue
        if best is None or abs(area(e) - target) < abs(area(best) - target):
            best = e
    return best if best is not None else edges


def synth_detection(rel: RelativeTarget,
                    model: DetectorModel) -> Optional[tuple[BoundingBox, float]]:
    if rel.z_D_true <= 0 or rel.range > model.R_det:
        return None
    cam = model.camera
    x_p, y_p = angular_centre(rel, cam)
    if abs(x_p) > 1 or abs(y_p) > 1:
        return None
    s = size_from_depth(rel.z_D_true, model)
    if s is None:
        return None

    cx = cam.W_I / 2 * (1 + x_p)
    cy = cam.H_I / 2 * (1 - y_p)
    half_w = cam.W_I * math.sqrt(s) / 2
    half_h = cam.H_I * math.sqrt(s) / 2
    x0, x1 = max(cx - half_w, 0.0), min(cx + half_w, cam.W_I)
    y0, y1 = max(cy - half_h, 0.0), min(cy + half_h, cam.H_I)
    if model.quantize_px:
        # clipping can only shrink the area; roundoff must not lift it past s
        target = min((x1 - x0) * (y1 - y0) / (cam.W_I * cam.H_I), s)
        x0, x1, y0, y1 = _quantize(x0, x1, y0, y1, target, cam)
    if not (x0 < x1 and y0 < y1):
        return None
    return BoundingBox(x0, y0, x1, y1), detection_probability(rel.range, model)
