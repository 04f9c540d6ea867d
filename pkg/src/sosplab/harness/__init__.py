"""Experiment harness: configs, runs, sweeps, lower-bound replays, checks."""

from .config import ExperimentConfig, build_noise, build_problem, load_config, validate_config
from .lowerbound import LowerboundOutcome, run_lowerbound
from .reports import (FIRST_PASSAGE_COLUMNS, RESULT_COLUMNS, SCHEMA_VERSION,
                      TRAJECTORY_COLUMNS, result_row, run_manifest, write_csv,
                      write_json)
from .sweep import SlopeFit, SweepOutcome, fit_loglog, run_solve, run_sweep
from .verify import SUITE_NAMES, SUITES, CheckResult, run_suite, run_verify

__all__ = [
    "ExperimentConfig", "build_noise", "build_problem", "load_config",
    "validate_config", "LowerboundOutcome", "run_lowerbound",
    "FIRST_PASSAGE_COLUMNS", "RESULT_COLUMNS", "SCHEMA_VERSION",
    "TRAJECTORY_COLUMNS", "result_row", "run_manifest", "write_csv",
    "write_json", "SlopeFit", "SweepOutcome", "fit_loglog", "run_solve",
    "run_sweep", "SUITE_NAMES", "SUITES", "CheckResult", "run_suite",
    "run_verify",
]
