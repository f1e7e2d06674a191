"""Target positioning from a single detection bounding box.

The depth law is a fitted, piecewise-linear map from the fraction of the
frame covered by the box to the distance along the camera axis. Lateral and
vertical offsets follow from the box centre and the camera half field of view.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .errors import InvalidInput, OutOfGate

SIZE_GATE = 0.5


@dataclass(frozen=True)
class CameraModel:
    W_I: float = 640.0
    H_I: float = 480.0
    half_fov_x: float = 31.1  # degrees
    half_fov_y: float = 24.4  # degrees

    def __post_init__(self):
        if not (self.W_I > 0 and self.H_I > 0):
            raise InvalidInput(f"frame dimensions must be positive, got {self.W_I}x{self.H_I}")
        for name in ("half_fov_x", "half_fov_y"):
            v = getattr(self, name)
            if not 0 < v < 90:
                raise InvalidInput(f"{name} must lie in (0, 90) degrees, got {v}")


@dataclass(frozen=True)
class BoundingBox:
    """Pixel box, origin top-left, x to the right and y downward."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        vals = (self.x_min, self.y_min, self.x_max, self.y_max)
        if not all(math.isfinite(v) for v in vals):
            raise InvalidInput(f"non-finite box coordinates {vals}")
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise InvalidInput(f"degenerate box {vals}")

    @property
    def centre(self) -> tuple[float, float]:
        return (self.x_min + (self.x_max - self.x_min) / 2,
                self.y_min + (self.y_max - self.y_min) / 2)

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    def check_in_frame(self, cam: CameraModel) -> None:
        if self.x_min < 0 or self.y_min < 0 or self.x_max > cam.W_I or self.y_max > cam.H_I:
            raise InvalidInput(
                f"box {(self.x_min, self.y_min, self.x_max, self.y_max)} "
                f"outside {cam.W_I}x{cam.H_I} frame")


@dataclass(frozen=True)
class NormalizedCentre:
    x_prime: float  # rightward positive
    y_prime: float  # upward positive


@dataclass(frozen=True)
class TargetEstimate:
    x_D: float  # lateral, rightward positive [m]
    y_D: float  # vertical, upward positive [m]
    z_D: float  # along the camera axis [m]
    size: float
    centre: NormalizedCentre
    probability: float


def normalize_centre(box: BoundingBox, cam: CameraModel) -> NormalizedCentre:
    """Map the box centre to [-1, 1]^2 with the vertical axis flipped to point up."""
    box.check_in_frame(cam)
    cx, cy = box.centre
    return NormalizedCentre(2 / cam.W_I * (cx - cam.W_I / 2),
                            2 / cam.H_I * (cam.H_I / 2 - cy))


def size_ratio(box: BoundingBox, cam: CameraModel) -> float:
    area = (box.x_max - box.x_min) * (box.y_max - box.y_min)
    if area <= 0:
        raise InvalidInput("zero-area box")
    return area / (cam.W_I * cam.H_I)


def depth_from_size(size: float) -> float:
    """Piecewise depth law, evaluated as fitted.

    Boundaries bind to the earlier branch (0.04 -> first, 0.4 -> second).
    The law jumps at both boundaries and the last branch is negative for
    every size it covers; both quirks are kept.
    """
    if not size > 0:
        raise InvalidInput(f"size must be positive, got {size}")
    if size >= SIZE_GATE:
        raise OutOfGate(f"size {size} is not below the {SIZE_GATE} gate")
    if size <= 0.04:
        return -120 * size + 7.2
    if size <= 0.4:
        return -3.42 * size + 2.2
    return -3.25 * size + 0.5


def position_from_detection(box: BoundingBox, cam: CameraModel, probability: float,
                            threshold: float) -> Optional[TargetEstimate]:
    """Camera-frame target position for one detection, or None when gated out.

    The estimate is rejected when the detector confidence is below
    ``threshold`` or the box covers half the frame or more.
    """
    if probability < threshold:
        return None
    centre = normalize_centre(box, cam)
    size = size_ratio(box, cam)
    if size >= SIZE_GATE:
        return None
    z_D = depth_from_size(size)
    x_D = math.tan(centre.x_prime * cam.half_fov_x * math.pi / 180) * z_D
    y_D = math.tan(centre.y_prime * cam.half_fov_y * math.pi / 180) * z_D
    return TargetEstimate(x_D, y_D, z_D, size, centre, probability)
