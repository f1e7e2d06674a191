from typing import Literal, Optional

from pydantic import BaseModel, Field

from ..simctl.scenario import CameraSpec, GuidanceSpec


class PositionRequest(BaseModel):
    box: tuple[float, float, float, float] = Field(description="x_min, y_min, x_max, y_max in pixels")
    probability: float = Field(ge=0, le=1)
    threshold: float = Field(0.7, ge=0, le=1)
    camera: CameraSpec = CameraSpec()


class Centre(BaseModel):
    x_prime: float
    y_prime: float


class Estimate(BaseModel):
    x_D: float
    y_D: float
    z_D: float
    size: Optional[float] = None
    centre: Centre
    probability: float = 1.0


class PositionResponse(BaseModel):
    estimate: Optional[Estimate]


class SetpointRequest(BaseModel):
    estimate: Estimate
    heading_deg: float = 0.0
    guidance: GuidanceSpec = GuidanceSpec()


class Setpoint(BaseModel):
    n: float
    e: float
    d: float


class SetpointResponse(BaseModel):
    setpoint: Optional[Setpoint]


class RunRequest(BaseModel):
    scenario: dict
    seed: Optional[int] = None
    mode: Optional[Literal["inproc", "split"]] = None


class Report(BaseModel):
    min_separation: float
    time_in_offboard: float
    capture: bool
    detections_emitted: int
    mean_detection_cadence: Optional[float]
    duration: float
    mission_complete: Optional[bool] = None


class RunResponse(BaseModel):
    name: str
    report: Report
    report_text: str
    log_csv: str


class ReportRequest(BaseModel):
    log_csv: str
    dt_s: Optional[float] = None
    deadband: float = 0.4
    capture_radius_m: float = 1.0
    capture_hold_s: float = 1.0
    camera: CameraSpec = CameraSpec()


class ReportResponse(BaseModel):
    report: Report
    report_text: str
