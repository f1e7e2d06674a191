"""Scenario files: YAML or JSON, units spelled out in every field name.

Unknown keys are rejected so that a typo in a gain name fails loudly
instead of silently running with the default.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Literal, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..cam_geometry import CameraModel
from ..detection_sim import DetectorModel
from ..errors import InvalidInput
from ..guidance import GuidanceConfig
from ..vehicle import Mission, VehicleState

Vec3 = tuple[float, float, float]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class EgoSpec(_Strict):
    position_m: Vec3 = (0.0, 0.0, -10.0)
    velocity_mps: Vec3 = (0.0, 0.0, 0.0)
    heading_deg: float = 0.0
    tau_s: float = Field(0.3, gt=0)


class MissionSpec(_Strict):
    waypoints_m: list[Vec3] = Field(min_length=1)
    acceptance_radius_m: float = Field(1.0, gt=0)
    cruise_speed_mps: float = Field(1.0, gt=0)


class EnemyLeg(_Strict):
    position_m: Vec3
    speed_mps: float = Field(0.0, ge=0)


class EnemySpec(_Strict):
    """Kinematic enemy: starts at the first path point, then flies each leg at its speed."""

    path: list[EnemyLeg] = Field(min_length=1)


class CameraSpec(_Strict):
    width_px: float = Field(640.0, gt=0)
    height_px: float = Field(480.0, gt=0)
    half_fov_x_deg: float = Field(31.1, gt=0, lt=90)
    half_fov_y_deg: float = Field(24.4, gt=0, lt=90)

    def to_model(self) -> CameraModel:
        return CameraModel(self.width_px, self.height_px, self.half_fov_x_deg, self.half_fov_y_deg)


class DetectorSpec(_Strict):
    camera: CameraSpec = CameraSpec()
    range_max_m: float = Field(12.0, gt=0)
    p_near: float = Field(0.95, gt=0, le=1)
    p_far: float = Field(0.70, gt=0, le=1)
    quantize_px: bool = True
    z_split_m: float = 2.2

    @model_validator(mode="after")
    def _probs_ordered(self):
        if self.p_far > self.p_near:
            raise ValueError("p_far must not exceed p_near")
        return self


class GuidanceSpec(_Strict):
    enabled: bool = True
    has_net: bool = False
    k1: float = Field(1.0, gt=0)
    k2: float = Field(0.5, gt=0)
    k_net: float = Field(0.5, gt=0)
    deadband: float = Field(0.4, gt=0, lt=1)
    threshold: float = Field(0.7, ge=0, le=1)
    T_D_s: float = Field(0.5, gt=0)
    t_R_s: float = Field(0.5, gt=0)
    v_cap_mps: float = Field(3.0, gt=0)
    rotation: Literal["verbatim", "standard"] = "verbatim"
    d_sign: Literal[1, -1] = 1
    approach_gain: float = Field(0.0, ge=0)

    def to_config(self) -> GuidanceConfig:
        return GuidanceConfig(self.k1, self.k2, self.k_net, self.deadband, self.has_net,
                              self.threshold, self.T_D_s, self.t_R_s, self.v_cap_mps,
                              self.rotation, float(self.d_sign), self.approach_gain)


class CaptureSpec(_Strict):
    radius_m: float = Field(1.0, gt=0)
    hold_s: float = Field(1.0, ge=0)


class Scenario(_Strict):
    name: str = "scenario"
    duration_s: float = Field(gt=0)
    dt_s: float = Field(0.02, gt=0)
    seed: int = 0
    run_mode: Literal["inproc", "split"] = "inproc"
    ego: EgoSpec = EgoSpec()
    mission: MissionSpec
    enemy: EnemySpec
    guidance: GuidanceSpec = GuidanceSpec()
    detector: DetectorSpec = DetectorSpec()
    capture: CaptureSpec = CaptureSpec()

    @field_validator("dt_s")
    @classmethod
    def _dt_sane(cls, v):
        if v > 1.0:
            raise ValueError("dt_s above 1 s is not a simulation step")
        return v

    def camera_model(self) -> CameraModel:
        return self.detector.camera.to_model()

    def detector_model(self) -> DetectorModel:
        d = self.detector
        return DetectorModel(self.camera_model(), d.range_max_m, d.p_near, d.p_far,
                             d.quantize_px, d.z_split_m, self.seed)

    def guidance_config(self) -> GuidanceConfig:
        return self.guidance.to_config()

    def initial_state(self) -> VehicleState:
        return VehicleState(self.ego.position_m, self.ego.velocity_mps, self.ego.heading_deg)

    def mission_model(self) -> Mission:
        m = self.mission
        return Mission(tuple(m.waypoints_m), m.acceptance_radius_m, m.cruise_speed_mps)


class ScenarioError(InvalidInput):
    def __init__(self, message: str, fields: Optional[list[str]] = None):
        super().__init__(message)
        self.fields = fields or []


def parse_scenario(data: dict) -> Scenario:
    try:
        return Scenario.model_validate(data)
    except ValidationError as exc:
        fields = [".".join(str(p) for p in err["loc"]) or "<root>" for err in exc.errors()]
        raise ScenarioError(f"invalid scenario: {exc.error_count()} error(s)", fields) from exc


def load_scenario(path: Union[str, Path]) -> Scenario:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        data = json.loads(text) if path.suffix == ".json" else yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ScenarioError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ScenarioError(f"{path}: top level must be a mapping")
    return parse_scenario(data)
