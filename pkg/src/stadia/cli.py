"""Command line entry point.

    stadia run <scenario> [--seed N] [--out DIR] [--mode inproc|split] [--det-port P] [--api URL]
    stadia report <log.csv> [--out DIR]
    stadia serve [--host H] [--port P]

Failures exit nonzero and print one JSON object to stderr with a ``reason``.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import InvalidInput
from .link import DEFAULT_DET_PORT, PORT_ENV, default_port

EXIT_INVALID = 2
EXIT_IO = 3
EXIT_RUNTIME = 4


class CliFailure(Exception):
    def __init__(self, code: int, reason: str, message: str, **extra):
        super().__init__(message)
        self.code = code
        self.payload = {"status": "error", "reason": reason, "message": message, **extra}


def _write_outputs(out: Path, name: str, log_csv: str, report_text: str, report: dict) -> None:
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{name}.csv").write_text(log_csv, encoding="utf-8")
        (out / "report.txt").write_text(report_text, encoding="utf-8")
        (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n",
                                         encoding="utf-8")
    except OSError as exc:
        raise CliFailure(EXIT_IO, "io_error", str(exc), path=str(out))


def _run_remote(args) -> None:
    import httpx
    import yaml

    try:
        data = yaml.safe_load(Path(args.scenario).read_text(encoding="utf-8"))
    except OSError as exc:
        raise CliFailure(EXIT_IO, "io_error", str(exc), path=args.scenario)
    body = {"scenario": data, "seed": args.seed, "mode": args.mode}
    try:
        resp = httpx.post(args.api.rstrip("/") + "/runs", json=body, timeout=300)
    except httpx.HTTPError as exc:
        raise CliFailure(EXIT_RUNTIME, "service_unreachable", str(exc), api=args.api)
    if resp.status_code == 422:
        detail = resp.json().get("detail")
        if isinstance(detail, dict):
            raise CliFailure(EXIT_INVALID, "invalid_scenario", detail.get("message", ""),
                             fields=detail.get("fields", []))
        raise CliFailure(EXIT_INVALID, "invalid_request", json.dumps(detail))
    if resp.status_code != 200:
        raise CliFailure(EXIT_RUNTIME, "service_error", resp.text, status=resp.status_code)
    payload = resp.json()
    _write_outputs(Path(args.out), payload["name"], payload["log_csv"], payload["report_text"],
                   payload["report"])
    sys.stdout.write(payload["report_text"])


def cmd_run(args) -> None:
    if args.api:
        return _run_remote(args)
    from .simctl import ScenarioError, format_log, load_scenario
    from .simctl.runner import execute

    try:
        s = load_scenario(args.scenario)
    except OSError as exc:
        raise CliFailure(EXIT_IO, "io_error", str(exc), path=args.scenario)
    except ScenarioError as exc:
        raise CliFailure(EXIT_INVALID, "invalid_scenario", str(exc), fields=exc.fields)
    port = args.det_port if args.det_port is not None else default_port()
    try:
        result = execute(s, args.seed, args.mode, det_port=port)
    except OSError as exc:
        raise CliFailure(EXIT_RUNTIME, "link_error", str(exc), det_port=port)
    _write_outputs(Path(args.out), s.name, format_log(result.rows), result.report.to_text(),
                   result.report.to_dict())
    sys.stdout.write(result.report.to_text())


def cmd_report(args) -> None:
    from .cam_geometry import CameraModel
    from .simctl import build_report, read_log, write_report
    from .service.app import infer_dt

    try:
        rows = read_log(args.log)
    except OSError as exc:
        raise CliFailure(EXIT_IO, "io_error", str(exc), path=args.log)
    except (ValueError, KeyError) as exc:
        raise CliFailure(EXIT_INVALID, "invalid_log", str(exc), path=args.log)
    dt = args.dt if args.dt is not None else infer_dt(rows)
    report = build_report(rows, dt, CameraModel(), args.deadband, args.capture_radius,
                          args.capture_hold)
    out = Path(args.out) if args.out else Path(args.log).parent
    try:
        out.mkdir(parents=True, exist_ok=True)
        write_report(report, out)
    except OSError as exc:
        raise CliFailure(EXIT_IO, "io_error", str(exc), path=str(out))
    sys.stdout.write(report.to_text())


def cmd_serve(args) -> None:
    import uvicorn

    uvicorn.run("stadia.service.app:app", host=args.host, port=args.port)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stadia", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate a scenario file")
    r.add_argument("scenario")
    r.add_argument("--seed", type=int, default=None)
    r.add_argument("--out", default="out")
    r.add_argument("--mode", choices=["inproc", "split"], default=None)
    r.add_argument("--det-port", type=int, default=None,
                   help=f"UDP detection port for split mode (default ${PORT_ENV} or {DEFAULT_DET_PORT}; 0 = any free port)")
    r.add_argument("--api", default=None, help="submit the run to a stadia service at this URL")
    r.set_defaults(func=cmd_run)

    rep = sub.add_parser("report", help="summarize a trajectory log")
    rep.add_argument("log")
    rep.add_argument("--out", default=None)
    rep.add_argument("--dt", type=float, default=None)
    rep.add_argument("--deadband", type=float, default=0.4)
    rep.add_argument("--capture-radius", type=float, default=1.0)
    rep.add_argument("--capture-hold", type=float, default=1.0)
    rep.set_defaults(func=cmd_report)

    sv = sub.add_parser("serve", help="start the HTTP service")
    sv.add_argument("--host", default="127.0.0.1")
    sv.add_argument("--port", type=int, default=8000)
    sv.set_defaults(func=cmd_serve)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except CliFailure as exc:
        print(json.dumps(exc.payload), file=sys.stderr)
        return exc.code
    except InvalidInput as exc:
        print(json.dumps({"status": "error", "reason": "invalid_input", "message": str(exc)}),
              file=sys.stderr)
        return EXIT_INVALID
    return 0


if __name__ == "__main__":
    sys.exit(main())
