"""Trajectory logs (CSV) and run summaries (text + JSON)."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Optional, Union

from ..cam_geometry import CameraModel
from ..detection_sim import angular_centre, relative_in_camera
from ..vehicle import VehicleState

COLUMNS = [
    "t", "ego_n", "ego_e", "ego_d", "ego_heading", "enemy_n", "enemy_e", "enemy_d",
    "mode", "det_seq", "x_D", "y_D", "z_D", "prob", "cmd_n", "cmd_e", "cmd_d",
]


@dataclass(frozen=True)
class LogRow:
    t: float
    ego: tuple[float, float, float]
    heading: float
    enemy: tuple[float, float, float]
    mode: str
    det_seq: Optional[int]
    est: Optional[tuple[float, float, float, float]]  # x_D, y_D, z_D, prob
    cmd: tuple[float, float, float]


@dataclass(frozen=True)
class RunReport:
    min_separation: float
    time_in_offboard: float
    capture: bool
    detections_emitted: int
    mean_detection_cadence: Optional[float]
    duration: float
    mission_complete: Optional[bool] = None

    def to_text(self) -> str:
        cadence = ("n/a" if self.mean_detection_cadence is None
                   else f"{self.mean_detection_cadence:.3f} s")
        lines = [
            f"duration            {self.duration:.2f} s",
            f"min separation      {self.min_separation:.3f} m",
            f"time in Offboard    {self.time_in_offboard:.2f} s",
            f"detections emitted  {self.detections_emitted}",
            f"detection cadence   {cadence}",
            f"capture             {'yes' if self.capture else 'no'}",
        ]
        if self.mission_complete is not None:
            lines.append(f"mission complete    {'yes' if self.mission_complete else 'no'}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return asdict(self)


def _f(v: float) -> str:
    return f"{v:.6f}"


def _row_cells(r: LogRow) -> list[str]:
    est = [_f(v) for v in r.est] if r.est else ["", "", "", ""]
    return [_f(r.t), *map(_f, r.ego), _f(r.heading), *map(_f, r.enemy), r.mode,
            "" if r.det_seq is None else str(r.det_seq), *est, *map(_f, r.cmd)]


def format_log(rows: Iterable[LogRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow(_row_cells(r))
    return buf.getvalue()


def write_log(rows: Iterable[LogRow], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.write_text(format_log(rows), encoding="utf-8")
    return path


def read_log(path: Union[str, Path]) -> list[LogRow]:
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != COLUMNS:
            raise ValueError(f"{path}: unexpected columns {reader.fieldnames}")
        for rec in reader:
            est = None
            if rec["z_D"]:
                est = tuple(float(rec[k]) for k in ("x_D", "y_D", "z_D", "prob"))
            rows.append(LogRow(
                t=float(rec["t"]),
                ego=tuple(float(rec[k]) for k in ("ego_n", "ego_e", "ego_d")),
                heading=float(rec["ego_heading"]),
                enemy=tuple(float(rec[k]) for k in ("enemy_n", "enemy_e", "enemy_d")),
                mode=rec["mode"],
                det_seq=int(rec["det_seq"]) if rec["det_seq"] else None,
                est=est,
                cmd=tuple(float(rec[k]) for k in ("cmd_n", "cmd_e", "cmd_d")),
            ))
    return rows


def _in_deadband(row: LogRow, cam: CameraModel, deadband: float) -> bool:
    rel = relative_in_camera(VehicleState(row.ego, (0.0, 0.0, 0.0), row.heading), row.enemy)
    if rel.z_D_true <= 0:
        return False
    x_p, y_p = angular_centre(rel, cam)
    return abs(x_p) <= deadband and abs(y_p) <= deadband


def build_report(rows: list[LogRow], dt: float, cam: CameraModel, deadband: float,
                 capture_radius: float, capture_hold: float,
                 mission_complete: Optional[bool] = None) -> RunReport:
    """Summarize a run.

    Capture means the enemy stayed inside ``capture_radius`` and inside the
    image dead-band (by ground truth) for ``capture_hold`` seconds in a row.
    """
    if not rows:
        return RunReport(math.inf, 0.0, False, 0, None, 0.0, mission_complete)
    min_sep = min(math.dist(r.ego, r.enemy) for r in rows)
    offboard = sum(1 for r in rows if r.mode == "Offboard") * dt
    det_times = [r.t for r in rows if r.det_seq is not None]
    cadence = None
    if len(det_times) > 1:
        cadence = (det_times[-1] - det_times[0]) / (len(det_times) - 1)

    captured, run = False, 0
    for r in rows:
        if math.dist(r.ego, r.enemy) <= capture_radius and _in_deadband(r, cam, deadband):
            run += 1
            if run * dt >= capture_hold - 1e-9:
                captured = True
                break
        else:
            run = 0
    return RunReport(min_sep, offboard, captured, len(det_times), cadence,
                     len(rows) * dt, mission_complete)


def write_report(report: RunReport, out_dir: Union[str, Path], stem: str = "report") -> tuple[Path, Path]:
    out_dir = Path(out_dir)
    txt = out_dir / f"{stem}.txt"
    js = out_dir / f"{stem}.json"
    txt.write_text(report.to_text(), encoding="utf-8")
    js.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return txt, js
