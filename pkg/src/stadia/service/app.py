"""HTTP front end over the library: positioning, setpoints and whole scenario runs."""
from __future__ import annotations

import os
import tempfile

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..cam_geometry import BoundingBox, NormalizedCentre, TargetEstimate, position_from_detection
from ..errors import InvalidInput
from ..guidance import manoeuvre_setpoint
from ..simctl import ScenarioError, build_report, format_log, parse_scenario, read_log
from ..simctl.runner import execute
from . import schemas


def _report(r) -> schemas.Report:
    return schemas.Report(**r.to_dict())


def create_app() -> FastAPI:
    app = FastAPI(title="stadia", version=__version__)

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/position", response_model=schemas.PositionResponse)
    def position(req: schemas.PositionRequest):
        try:
            cam = req.camera.to_model()
            est = position_from_detection(BoundingBox(*req.box), cam, req.probability, req.threshold)
        except InvalidInput as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        if est is None:
            return {"estimate": None}
        return {"estimate": {
            "x_D": est.x_D, "y_D": est.y_D, "z_D": est.z_D, "size": est.size,
            "centre": {"x_prime": est.centre.x_prime, "y_prime": est.centre.y_prime},
            "probability": est.probability}}

    @app.post("/setpoint", response_model=schemas.SetpointResponse)
    def setpoint(req: schemas.SetpointRequest):
        cfg = req.guidance.to_config()
        e = req.estimate
        if e.probability < cfg.threshold:
            return {"setpoint": None}
        est = TargetEstimate(e.x_D, e.y_D, e.z_D, e.size if e.size is not None else float("nan"),
                             NormalizedCentre(e.centre.x_prime, e.centre.y_prime), e.probability)
        sp = manoeuvre_setpoint(est, req.heading_deg, cfg)
        return {"setpoint": {"n": sp.n, "e": sp.e, "d": sp.d}}

    @app.post("/runs", response_model=schemas.RunResponse)
    def run(req: schemas.RunRequest):
        try:
            s = parse_scenario(req.scenario)
        except ScenarioError as exc:
            raise HTTPException(status_code=422, detail={"reason": "invalid_scenario",
                                                         "message": str(exc), "fields": exc.fields})
        result = execute(s, req.seed, req.mode)
        return {"name": s.name, "report": _report(result.report),
                "report_text": result.report.to_text(), "log_csv": format_log(result.rows)}

    @app.post("/reports", response_model=schemas.ReportResponse)
    def report(req: schemas.ReportRequest):
        fd, path = tempfile.mkstemp(suffix=".csv")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(req.log_csv)
            try:
                rows = read_log(path)
            except (ValueError, KeyError) as exc:
                raise HTTPException(status_code=422, detail=f"unreadable log: {exc}")
        finally:
            os.unlink(path)
        dt = req.dt_s if req.dt_s is not None else infer_dt(rows)
        r = build_report(rows, dt, req.camera.to_model(), req.deadband,
                         req.capture_radius_m, req.capture_hold_s)
        return {"report": _report(r), "report_text": r.to_text()}

    return app


def infer_dt(rows) -> float:
    if len(rows) < 2:
        return 0.0
    return round(rows[1].t - rows[0].t, 6)


app = create_app()
