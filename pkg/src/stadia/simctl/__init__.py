from .report import COLUMNS, LogRow, RunReport, build_report, format_log, read_log, write_log, write_report
from .runner import EnemyTrack, InProcessDetector, RunResult, run_scenario
from .scenario import Scenario, ScenarioError, load_scenario, parse_scenario

__all__ = [
    "COLUMNS", "LogRow", "RunReport", "build_report", "format_log", "read_log", "write_log",
    "write_report", "EnemyTrack", "InProcessDetector", "RunResult", "run_scenario",
    "Scenario", "ScenarioError", "load_scenario", "parse_scenario",
]
